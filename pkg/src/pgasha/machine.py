"""Execution of instruction sequences against a Boolean register file.

Two engines share one run protocol. The ``reference`` engine walks the
instruction objects directly and is the readable statement of the
semantics. The ``compiled`` engine runs an integer encoding of the
program through a numba kernel; it is what makes multi-block SHA-256
programs (about 7.8e5 instructions per block) practical.

Programs may be executed as a stream of segments. Since the sequence is
single-pass and jumps only go forward, running segment after segment and
carrying any overshoot past the end of one segment into the next is the
same as running their concatenation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .program import (
    Halt,
    InstructionSequence,
    Jump,
    Kind,
    NegativeTest,
    Plain,
    PositiveTest,
    basic_instruction,
    halt,
    jump,
)

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

# code = op | cmd << 3 | kind << 5 | number << 8
OP_PLAIN, OP_POS, OP_NEG, OP_JUMP, OP_HALT = range(5)
CMD_GET, CMD_SET_F, CMD_SET_T = range(3)
KIND_IN, KIND_OUT, KIND_AUX = range(3)

_KIND_CODE = {Kind.INPUT: KIND_IN, Kind.OUTPUT: KIND_OUT, Kind.AUX: KIND_AUX}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}
_OP_CODE = {Plain: OP_PLAIN, PositiveTest: OP_POS, NegativeTest: OP_NEG}
_CODE_OP = {v: k for k, v in _OP_CODE.items()}

# kernel status codes
_FELL_OFF, _HALTED, _JUMP_ZERO, _LIMIT, _RANGE = range(5)


class RegisterRangeError(IndexError):
    """The program named a register outside the environment it was run in."""

    def __init__(self, kind: Kind, number: int, position: int) -> None:
        super().__init__(
            f"instruction at position {position} names {kind.value}:{number}, "
            "which is outside the register file"
        )
        self.kind = kind
        self.number = number
        self.position = position


# -- encoding ----------------------------------------------------------------


def _encode_one(ins) -> int:
    cls = type(ins)
    if cls is Jump:
        return OP_JUMP | ins.offset << 8
    if cls is Halt:
        return OP_HALT
    b = ins.basic
    cmd = CMD_GET if b.value is None else (CMD_SET_T if b.value else CMD_SET_F)
    return _OP_CODE[cls] | cmd << 3 | _KIND_CODE[b.register.kind] << 5 | b.register.number << 8


def encode(seq: InstructionSequence) -> np.ndarray:
    """Encode *seq* as an int64 array, one entry per instruction."""
    cache: dict = {}
    out = []
    for ins in seq:
        c = cache.get(ins)
        if c is None:
            c = cache[ins] = _encode_one(ins)
        out.append(c)
    return np.array(out, dtype=np.int64)


def decode(code: np.ndarray) -> InstructionSequence:
    items = []
    for c in code.tolist():
        op = c & 7
        if op == OP_JUMP:
            items.append(jump(c >> 8))
        elif op == OP_HALT:
            items.append(halt())
        else:
            cmd = (c >> 3) & 3
            value = None if cmd == CMD_GET else cmd == CMD_SET_T
            b = basic_instruction(_CODE_KIND[(c >> 5) & 3], c >> 8, value)
            items.append(_CODE_OP[op](b))
    return InstructionSequence(items)


def referenced_sizes(program: InstructionSequence | np.ndarray) -> tuple[int, int, int]:
    """Largest register number named per kind, as ``(inputs, outputs, aux)``."""
    code = program if isinstance(program, np.ndarray) else encode(program)
    ops = code & 7
    basic = code[ops < OP_JUMP]
    kinds = (basic >> 5) & 3
    nums = basic >> 8
    sizes = []
    for k in (KIND_IN, KIND_OUT, KIND_AUX):
        sel = nums[kinds == k]
        sizes.append(int(sel.max()) if sel.size else 0)
    return tuple(sizes)


# -- environment and results -------------------------------------------------


@dataclass
class RegisterFile:
    """Register contents; arrays are 1-based (slot 0 is unused)."""

    inputs: np.ndarray
    outputs: np.ndarray
    aux: np.ndarray

    @classmethod
    def create(cls, inputs: Sequence[bool] | np.ndarray, m: int, k: int,
               aux: Sequence[bool] | np.ndarray | None = None) -> RegisterFile:
        inp = np.zeros(len(inputs) + 1, dtype=np.uint8)
        inp[1:] = np.asarray(inputs, dtype=bool)
        a = np.zeros(k + 1, dtype=np.uint8)
        if aux is not None:
            aux = np.asarray(aux, dtype=bool)
            if len(aux) > k:
                raise ValueError(f"{len(aux)} initial aux values for {k} aux registers")
            a[1:len(aux) + 1] = aux
        return cls(inp, np.zeros(m + 1, dtype=np.uint8), a)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.inputs) - 1, len(self.outputs) - 1, len(self.aux) - 1

    def read_word(self, kind: Kind, base: int) -> int:
        arr = {Kind.INPUT: self.inputs, Kind.OUTPUT: self.outputs, Kind.AUX: self.aux}[kind]
        bits = arr[base:base + 32].astype(np.uint64)
        return int((bits << np.arange(32, dtype=np.uint64)).sum())

    def write_word(self, kind: Kind, base: int, value: int) -> None:
        arr = {Kind.INPUT: self.inputs, Kind.OUTPUT: self.outputs, Kind.AUX: self.aux}[kind]
        arr[base:base + 32] = (value >> np.arange(32)) & 1

    def copy(self) -> RegisterFile:
        return RegisterFile(self.inputs.copy(), self.outputs.copy(), self.aux.copy())


@dataclass(frozen=True)
class RunLimits:
    max_steps: int

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class RunMetrics:
    program_length: int
    steps_executed: int
    max_in_index_touched: int
    max_out_index_touched: int
    max_aux_index_touched: int

    def as_dict(self) -> dict[str, int]:
        return {
            "program_length": self.program_length,
            "steps_executed": self.steps_executed,
            "max_in_index_touched": self.max_in_index_touched,
            "max_out_index_touched": self.max_out_index_touched,
            "max_aux_index_touched": self.max_aux_index_touched,
        }


@dataclass(frozen=True)
class Terminated:
    outputs: np.ndarray
    metrics: RunMetrics
    registers: RegisterFile = field(repr=False)


@dataclass(frozen=True)
class Inaction:
    """Execution stopped without termination.

    *position* is 1-based: the ``#0`` instruction, or the nonexistent
    position control was passed to beyond the end of the program.
    """

    position: int
    outputs: np.ndarray
    metrics: RunMetrics
    registers: RegisterFile = field(repr=False)


@dataclass(frozen=True)
class LimitExceeded:
    position: int
    metrics: RunMetrics
    registers: RegisterFile = field(repr=False)


ExecutionOutcome = Union[Terminated, Inaction, LimitExceeded]


# -- engines -----------------------------------------------------------------


def _run_codes(code, start, inp, out, aux, budget, touched):
    """Run *code* from index *start*; returns ``(status, index, steps)``.

    *touched* holds the largest register number used per kind and is
    updated in place.
    """
    n = code.shape[0]
    pos = start
    steps = 0
    n_in = inp.shape[0]
    n_out = out.shape[0]
    n_aux = aux.shape[0]
    while pos < n:
        if steps >= budget:
            return _LIMIT, pos, steps
        c = code[pos]
        op = c & 7
        if op == OP_JUMP:
            steps += 1
            off = c >> 8
            if off == 0:
                return _JUMP_ZERO, pos, steps
            pos += off
            continue
        if op == OP_HALT:
            steps += 1
            return _HALTED, pos, steps
        cmd = (c >> 3) & 3
        kind = (c >> 5) & 3
        num = c >> 8
        if kind == KIND_AUX:
            if num >= n_aux:
                return _RANGE, pos, steps
            if num > touched[2]:
                touched[2] = num
            if cmd == CMD_GET:
                reply = aux[num] != 0
            else:
                reply = cmd == CMD_SET_T
                aux[num] = 1 if reply else 0
        elif kind == KIND_IN:
            if num >= n_in or cmd != CMD_GET:
                return _RANGE, pos, steps
            if num > touched[0]:
                touched[0] = num
            reply = inp[num] != 0
        else:
            if num >= n_out or cmd == CMD_GET:
                return _RANGE, pos, steps
            if num > touched[1]:
                touched[1] = num
            reply = cmd == CMD_SET_T
            out[num] = 1 if reply else 0
        steps += 1
        if op == OP_PLAIN or (op == OP_POS) == reply:
            pos += 1
        else:
            pos += 2
    return _FELL_OFF, pos, steps


_run_codes_py = _run_codes
if numba is not None:
    _run_codes = numba.njit(cache=True, nogil=True)(_run_codes)

_TOUCH_SLOT = {Kind.INPUT: 0, Kind.OUTPUT: 1, Kind.AUX: 2}


def _run_reference(items, start, regs: RegisterFile, budget, touched, trace=None):
    """Same protocol as the compiled kernel, over instruction objects.

    If *trace* is a list, the index of every executed instruction is appended.
    """
    arrays = {Kind.INPUT: regs.inputs, Kind.OUTPUT: regs.outputs, Kind.AUX: regs.aux}
    n = len(items)
    pos = start
    steps = 0
    while pos < n:
        if steps >= budget:
            return _LIMIT, pos, steps
        ins = items[pos]
        if trace is not None:
            trace.append(pos)
        if isinstance(ins, Jump):
            steps += 1
            if ins.offset == 0:
                return _JUMP_ZERO, pos, steps
            pos += ins.offset
            continue
        if isinstance(ins, Halt):
            steps += 1
            return _HALTED, pos, steps
        b = ins.basic
        kind, num = b.register.kind, b.register.number
        arr = arrays[kind]
        if num >= len(arr):
            return _RANGE, pos, steps
        # input registers are never written, output registers never read
        if (kind is Kind.INPUT and not b.is_get) or (kind is Kind.OUTPUT and b.is_get):
            return _RANGE, pos, steps
        slot = _TOUCH_SLOT[kind]
        touched[slot] = max(touched[slot], num)
        if b.is_get:
            reply = bool(arr[num])
        else:
            arr[num] = b.value
            reply = b.value
        steps += 1
        if isinstance(ins, Plain) or isinstance(ins, PositiveTest) == reply:
            pos += 1
        else:
            pos += 2
    return _FELL_OFF, pos, steps


Segment = Union[InstructionSequence, np.ndarray]


def execute_segments(segments: Iterable[Segment], registers: RegisterFile,
                     max_steps: int | None = None, engine: str = "compiled",
                     trace: list | None = None) -> ExecutionOutcome:
    """Run the concatenation of *segments* against *registers* (mutated in place).

    With the compiled engine, segments may be pre-encoded int64 arrays.
    *trace* (reference engine only) collects the 1-based position of every
    executed instruction.
    """
    if trace is not None and engine != "reference":
        raise ValueError("tracing needs the reference engine")
    if engine not in ("compiled", "reference"):
        raise ValueError(f"unknown engine {engine!r}")
    segments = iter(segments)
    touched = np.zeros(3, dtype=np.int64)
    budget = max_steps if max_steps is not None else np.iinfo(np.int64).max
    steps = 0
    offset = 0  # global index of the current segment's first instruction
    carry = 0   # index to resume at within the next segment
    total = 0

    def metrics() -> RunMetrics:
        return RunMetrics(total, steps, int(touched[0]), int(touched[1]), int(touched[2]))

    for seg in segments:
        if engine == "compiled":
            code = seg if isinstance(seg, np.ndarray) else encode(seg)
            n = len(code)
            status, pos, ran = _run_codes(code, carry, registers.inputs, registers.outputs,
                                          registers.aux, budget - steps, touched)
        else:
            items = decode(seg).items if isinstance(seg, np.ndarray) else seg.items
            n = len(items)
            seg_trace = [] if trace is not None else None
            status, pos, ran = _run_reference(items, carry, registers, budget - steps, touched,
                                              seg_trace)
            if trace is not None:
                trace.extend(offset + p + 1 for p in seg_trace)
        steps += ran
        total += n
        if status == _FELL_OFF:
            carry = pos - n
            offset += n
            continue
        # remaining segments still count towards the program length
        position = offset + pos + 1
        if status == _HALTED:
            for rest in segments:
                total += len(rest)
            return Terminated(registers.outputs[1:].astype(bool), metrics(), registers)
        if status == _JUMP_ZERO:
            for rest in segments:
                total += len(rest)
            return Inaction(position, registers.outputs[1:].astype(bool), metrics(), registers)
        if status == _LIMIT:
            for rest in segments:
                total += len(rest)
            return LimitExceeded(position, metrics(), registers)
        ins = decode(code[pos:pos + 1])[0] if engine == "compiled" else items[pos]
        reg = ins.basic.register
        raise RegisterRangeError(reg.kind, reg.number, position)
    return Inaction(offset + carry + 1, registers.outputs[1:].astype(bool), metrics(), registers)


def execute(program: InstructionSequence, inputs: Sequence[bool] | np.ndarray = (),
            sizes: tuple[int, int] | None = None, limits: RunLimits | None = None, *,
            aux: Sequence[bool] | np.ndarray | None = None,
            engine: str = "compiled", trace: list | None = None) -> ExecutionOutcome:
    """Execute *program* with the given input register contents.

    *sizes* is ``(outputs, aux)``; by default both are taken from the
    largest register numbers the program names. ``max_steps`` defaults to
    the program length, which single-pass execution can never exceed.
    """
    code = encode(program) if engine == "compiled" else None
    if sizes is None:
        _, m, k = referenced_sizes(code if code is not None else program)
        if aux is not None:
            k = max(k, len(aux))
    else:
        m, k = sizes
    regs = RegisterFile.create(inputs, m, k, aux)
    max_steps = limits.max_steps if limits is not None else max(len(program), 1)
    seg = code if code is not None else program
    return execute_segments([seg], regs, max_steps, engine, trace)
