"""Finite single-pass instruction sequences over Boolean registers.

Instructions are immutable values. Generators build them through the
cached factories at the bottom of this module, so long programs share a
small pool of instruction objects instead of allocating one per position.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Union

MAX_JUMP = 2**32


class Kind(enum.Enum):
    INPUT = "in"
    OUTPUT = "out"
    AUX = "aux"


@dataclass(frozen=True, slots=True)
class RegisterName:
    kind: Kind
    number: int

    def __post_init__(self) -> None:
        if self.number < 1:
            raise ValueError(f"register number must be positive, got {self.number}")

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.number}"


@dataclass(frozen=True, slots=True)
class BasicInstruction:
    """A register name with a command: ``get`` when *value* is None, else ``set:value``."""

    register: RegisterName
    value: bool | None = None

    def __post_init__(self) -> None:
        kind = self.register.kind
        if kind is Kind.INPUT and self.value is not None:
            raise InvalidBasicInstruction(f"input registers are read-only: {self}")
        if kind is Kind.OUTPUT and self.value is None:
            raise InvalidBasicInstruction(f"output registers are write-only: {self}")

    @property
    def is_get(self) -> bool:
        return self.value is None

    def __str__(self) -> str:
        if self.value is None:
            return f"{self.register}.get"
        return f"{self.register}.set:{'t' if self.value else 'f'}"


@dataclass(frozen=True, slots=True)
class Plain:
    basic: BasicInstruction

    def __str__(self) -> str:
        return str(self.basic)


@dataclass(frozen=True, slots=True)
class PositiveTest:
    basic: BasicInstruction

    def __str__(self) -> str:
        return f"+{self.basic}"


@dataclass(frozen=True, slots=True)
class NegativeTest:
    basic: BasicInstruction

    def __str__(self) -> str:
        return f"-{self.basic}"


@dataclass(frozen=True, slots=True)
class Jump:
    offset: int

    def __post_init__(self) -> None:
        if self.offset < 0:
            raise ValueError(f"jump offset must be a natural number, got {self.offset}")

    def __str__(self) -> str:
        return f"#{self.offset}"


@dataclass(frozen=True, slots=True)
class Halt:
    def __str__(self) -> str:
        return "!"


Instruction = Union[Plain, PositiveTest, NegativeTest, Jump, Halt]


class InstructionSequence:
    """An immutable finite list of primitive instructions."""

    __slots__ = ("_items",)

    def __init__(self, items: Iterable[Instruction] = ()) -> None:
        self._items: tuple[Instruction, ...] = tuple(items)

    @property
    def items(self) -> tuple[Instruction, ...]:
        return self._items

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[Instruction]:
        return iter(self._items)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return InstructionSequence(self._items[index])
        return self._items[index]

    def __add__(self, other: InstructionSequence) -> InstructionSequence:
        if not isinstance(other, InstructionSequence):
            return NotImplemented
        return InstructionSequence(self._items + other._items)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InstructionSequence):
            return NotImplemented
        return self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __repr__(self) -> str:
        if len(self._items) <= 8:
            body = "; ".join(map(str, self._items))
        else:
            body = "; ".join(map(str, self._items[:8])) + f"; ... ({len(self._items)} total)"
        return f"InstructionSequence([{body}])"


def concat(parts: Iterable[InstructionSequence]) -> InstructionSequence:
    return InstructionSequence(itertools.chain.from_iterable(p.items for p in parts))


def length(seq: InstructionSequence) -> int:
    return len(seq)


# -- text format -------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvalidBasicInstruction(ValueError):
    """A register/command pair outside the basic-instruction alphabet."""


class InvalidBasicInstructionError(ParseError):
    pass


_NUM = r"[1-9][0-9]*"
_LINE = re.compile(
    rf"(?P<test>[+-]?)(?P<kind>in|out|aux):(?P<num>{_NUM})\.(?P<cmd>get|set:t|set:f)"
    rf"|#(?P<jump>0|{_NUM})"
    r"|(?P<halt>!)"
)


def _parse_line(line: str, lineno: int) -> Instruction:
    m = _LINE.fullmatch(line)
    if m is None:
        raise ParseError(lineno, f"not an instruction: {line!r}")
    if m["halt"]:
        return halt()
    if m["jump"] is not None:
        offset = int(m["jump"])
        if offset > MAX_JUMP:
            raise ParseError(lineno, f"jump offset exceeds 2**32: {line!r}")
        return jump(offset)
    kind = Kind(m["kind"])
    value = None if m["cmd"] == "get" else m["cmd"] == "set:t"
    try:
        basic = basic_instruction(kind, int(m["num"]), value)
    except InvalidBasicInstruction as exc:
        raise InvalidBasicInstructionError(lineno, f"{exc} in {line!r}") from None
    if m["test"] == "+":
        return PositiveTest(basic)
    if m["test"] == "-":
        return NegativeTest(basic)
    return Plain(basic)


def parse(text: str) -> InstructionSequence:
    """Parse the one-instruction-per-line text format produced by :func:`serialize`."""
    if not text:
        return InstructionSequence()
    lines = text.split("\n")
    if lines[-1] != "":
        raise ParseError(len(lines), "missing final newline")
    lines.pop()
    cache: dict[str, Instruction] = {}
    items = []
    for lineno, line in enumerate(lines, 1):
        ins = cache.get(line)
        if ins is None:
            ins = cache[line] = _parse_line(line, lineno)
        items.append(ins)
    return InstructionSequence(items)


def iter_lines(seq: InstructionSequence) -> Iterator[str]:
    cache: dict[Instruction, str] = {}
    for ins in seq:
        s = cache.get(ins)
        if s is None:
            s = cache[ins] = str(ins)
        yield s


def serialize(seq: InstructionSequence) -> str:
    if not len(seq):
        return ""
    return "\n".join(iter_lines(seq)) + "\n"


# -- cached constructors -----------------------------------------------------


@lru_cache(maxsize=None)
def register(kind: Kind, number: int) -> RegisterName:
    return RegisterName(kind, number)


@lru_cache(maxsize=None)
def basic_instruction(kind: Kind, number: int, value: bool | None = None) -> BasicInstruction:
    return BasicInstruction(register(kind, number), value)


@lru_cache(maxsize=None)
def get(kind: Kind, number: int) -> Plain:
    return Plain(basic_instruction(kind, number))


@lru_cache(maxsize=None)
def set_(kind: Kind, number: int, value: bool) -> Plain:
    return Plain(basic_instruction(kind, number, value))


@lru_cache(maxsize=None)
def ptest(kind: Kind, number: int, value: bool | None = None) -> PositiveTest:
    return PositiveTest(basic_instruction(kind, number, value))


@lru_cache(maxsize=None)
def ntest(kind: Kind, number: int, value: bool | None = None) -> NegativeTest:
    return NegativeTest(basic_instruction(kind, number, value))


@lru_cache(maxsize=None)
def jump(offset: int) -> Jump:
    return Jump(offset)


_HALT = Halt()


def halt() -> Halt:
    return _HALT
