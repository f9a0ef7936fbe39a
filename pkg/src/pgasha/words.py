"""Instruction sequences computing operations on 32-bit words.

A word lives in 32 successive registers starting at a base number
congruent to 1 mod 32. The register at offset ``i`` holds the bit of
significance ``2**i``: the adder ripples its carry from offset 0 upwards
and the shifts move offset ``i + n`` down to offset ``i``, which only
computes right shifts and additions under that order.

Every generator is pure and cached, so reusing one (as the SHA-256
rounds do constantly) costs a dictionary lookup.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

from .program import InstructionSequence, Kind, concat, jump, ntest, ptest, set_

MASK = 0xFFFFFFFF

# the single carry bit used by ADD, and the four scratch words of the derived ops
CARRY = 2945
SCRATCH_BASES = (2817, 2849, 2881, 2913)


class WordOpError(ValueError):
    pass


class OverlapError(WordOpError):
    pass


class ArityError(WordOpError):
    pass


class ShiftAmountError(WordOpError):
    pass


class ScratchCollisionError(WordOpError):
    pass


class RegisterKindError(WordOpError):
    pass


@dataclass(frozen=True, slots=True)
class WordRef:
    kind: Kind
    base: int

    def __post_init__(self) -> None:
        if self.base < 1 or self.base % 32 != 1:
            raise ValueError(f"word base must be positive and 1 mod 32, got {self.base}")

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.base}"

    def covers(self, kind: Kind, number: int) -> bool:
        return self.kind is kind and self.base <= number < self.base + 32


def aux_word(base: int) -> WordRef:
    return WordRef(Kind.AUX, base)


SCRATCH = tuple(aux_word(b) for b in SCRATCH_BASES)


class Op(NamedTuple):
    name: str
    amount: int = 0

    def __str__(self) -> str:
        return f"{self.name}{self.amount}" if self.name in ("SHR", "ROTR") else self.name


NOT = Op("NOT")
AND = Op("AND")
XOR = Op("XOR")
ADD = Op("ADD")
CH = Op("CH")
MAJ = Op("MAJ")
BIG_SIGMA0 = Op("BigSigma0")
BIG_SIGMA1 = Op("BigSigma1")
SMALL_SIGMA0 = Op("SmallSigma0")
SMALL_SIGMA1 = Op("SmallSigma1")


def SHR(n: int) -> Op:
    _check_amount(n)
    return Op("SHR", n)


def ROTR(n: int) -> Op:
    _check_amount(n)
    return Op("ROTR", n)


BASIC_OPS = ("NOT", "AND", "XOR", "SHR", "ROTR", "ADD")
DERIVED_OPS = ("CH", "MAJ", "BigSigma0", "BigSigma1", "SmallSigma0", "SmallSigma1")
ARITY = {"NOT": 1, "AND": 2, "XOR": 2, "SHR": 1, "ROTR": 1, "ADD": 2,
         "CH": 3, "MAJ": 3, "BigSigma0": 1, "BigSigma1": 1, "SmallSigma0": 1, "SmallSigma1": 1}


def _check_amount(n: int) -> None:
    if not 0 < n < 32:
        raise ShiftAmountError(f"shift/rotate amount must satisfy 0 < n < 32, got {n}")


def _check(srcs: Sequence[WordRef], dst: WordRef) -> None:
    for s in srcs:
        if s.kind not in (Kind.INPUT, Kind.AUX):
            raise RegisterKindError(f"source {s} must be an input or auxiliary word")
    if dst.kind not in (Kind.AUX, Kind.OUTPUT):
        raise RegisterKindError(f"destination {dst} must be an auxiliary or output word")
    if dst in srcs:
        raise OverlapError(f"destination {dst} coincides with a source")


# -- basic operations --------------------------------------------------------


@lru_cache(maxsize=None)
def not_(s: WordRef, d: WordRef) -> InstructionSequence:
    _check((s,), d)
    items = []
    for i in range(32):
        items += [
            set_(d.kind, d.base + i, False),
            ntest(s.kind, s.base + i),
            set_(d.kind, d.base + i, True),
        ]
    return InstructionSequence(items)


@lru_cache(maxsize=None)
def and_(s1: WordRef, s2: WordRef, d: WordRef) -> InstructionSequence:
    _check((s1, s2), d)
    items = []
    for i in range(32):
        items += [
            set_(d.kind, d.base + i, False),
            ntest(s1.kind, s1.base + i), jump(4),
            ntest(s2.kind, s2.base + i), jump(2),
            set_(d.kind, d.base + i, True),
        ]
    return InstructionSequence(items)


@lru_cache(maxsize=None)
def xor(s1: WordRef, s2: WordRef, d: WordRef) -> InstructionSequence:
    _check((s1, s2), d)
    items = []
    for i in range(32):
        items += [
            set_(d.kind, d.base + i, False),
            ntest(s1.kind, s1.base + i), jump(4),
            ptest(s2.kind, s2.base + i), jump(5), jump(3),
            ntest(s2.kind, s2.base + i), jump(2),
            set_(d.kind, d.base + i, True),
        ]
    return InstructionSequence(items)


def _shifted_low(s: WordRef, d: WordRef, n: int) -> list:
    items = []
    for i in range(32 - n):
        items += [
            set_(d.kind, d.base + i, False),
            ptest(s.kind, s.base + i + n),
            set_(d.kind, d.base + i, True),
        ]
    return items


@lru_cache(maxsize=None)
def shr(n: int, s: WordRef, d: WordRef) -> InstructionSequence:
    _check_amount(n)
    _check((s,), d)
    items = _shifted_low(s, d, n)
    items += [set_(d.kind, d.base + i + 32 - n, False) for i in range(n)]
    return InstructionSequence(items)


@lru_cache(maxsize=None)
def rotr(n: int, s: WordRef, d: WordRef) -> InstructionSequence:
    _check_amount(n)
    _check((s,), d)
    items = _shifted_low(s, d, n)
    for i in range(n):
        items += [
            set_(d.kind, d.base + i + 32 - n, False),
            ptest(s.kind, s.base + i),
            set_(d.kind, d.base + i + 32 - n, True),
        ]
    return InstructionSequence(items)


@lru_cache(maxsize=None)
def add(s1: WordRef, s2: WordRef, d: WordRef) -> InstructionSequence:
    """Addition modulo 2**32, rippling the carry bit through ``aux:2945``."""
    _check((s1, s2), d)
    for w in (s1, s2, d):
        if w.covers(Kind.AUX, CARRY):
            raise OverlapError(f"word {w} overlaps the carry register aux:{CARRY}")
    A = Kind.AUX
    items = [set_(A, CARRY, False)]
    for i in range(32):
        x = (s1.kind, s1.base + i)
        y = (s2.kind, s2.base + i)
        z = (d.kind, d.base + i)
        items += [
            set_(*z, False),
            ntest(*x), jump(7),
            ntest(*y), jump(10),
            ntest(A, CARRY), jump(10),
            set_(*z, True), jump(8),
            ntest(*y), jump(8),
            ntest(A, CARRY), jump(8), jump(3),
            ntest(A, CARRY), jump(5),
            set_(A, CARRY, True), jump(5),
            ntest(A, CARRY), jump(2),
            set_(*z, True), set_(A, CARRY, False),
        ]
    return InstructionSequence(items)


# -- derived operations ------------------------------------------------------


def _check_scratch(srcs: Sequence[WordRef], dst: WordRef) -> None:
    _check(srcs, dst)
    for w in (*srcs, dst):
        if w in SCRATCH:
            raise ScratchCollisionError(f"word {w} is reserved as scratch for derived operations")


T1, T2, T3, T4 = SCRATCH


@lru_cache(maxsize=None)
def ch(s1: WordRef, s2: WordRef, s3: WordRef, d: WordRef) -> InstructionSequence:
    _check_scratch((s1, s2, s3), d)
    return concat([not_(s1, T1), and_(s1, s2, T2), and_(T1, s3, T3), xor(T2, T3, d)])


@lru_cache(maxsize=None)
def maj(s1: WordRef, s2: WordRef, s3: WordRef, d: WordRef) -> InstructionSequence:
    _check_scratch((s1, s2, s3), d)
    return concat([
        and_(s1, s2, T1), and_(s1, s3, T2), and_(s2, s3, T3),
        xor(T1, T2, T4), xor(T3, T4, d),
    ])


def _three_way(parts, s: WordRef, d: WordRef) -> InstructionSequence:
    _check_scratch((s,), d)
    (g1, n1), (g2, n2), (g3, n3) = parts
    return concat([g1(n1, s, T1), g2(n2, s, T2), g3(n3, s, T3), xor(T1, T2, T4), xor(T3, T4, d)])


@lru_cache(maxsize=None)
def big_sigma0(s: WordRef, d: WordRef) -> InstructionSequence:
    return _three_way(((rotr, 2), (rotr, 13), (rotr, 22)), s, d)


@lru_cache(maxsize=None)
def big_sigma1(s: WordRef, d: WordRef) -> InstructionSequence:
    return _three_way(((rotr, 6), (rotr, 11), (rotr, 25)), s, d)


@lru_cache(maxsize=None)
def small_sigma0(s: WordRef, d: WordRef) -> InstructionSequence:
    return _three_way(((rotr, 7), (rotr, 18), (shr, 3)), s, d)


@lru_cache(maxsize=None)
def small_sigma1(s: WordRef, d: WordRef) -> InstructionSequence:
    return _three_way(((rotr, 17), (rotr, 19), (shr, 10)), s, d)


# -- constants and moves -----------------------------------------------------


@lru_cache(maxsize=None)
def set_word(value: int, d: WordRef) -> InstructionSequence:
    """Store the constant *value*; offset ``i`` gets the bit of significance ``2**i``."""
    if not 0 <= value <= MASK:
        raise ValueError(f"not a 32-bit word: {value:#x}")
    if d.kind not in (Kind.AUX, Kind.OUTPUT):
        raise RegisterKindError(f"destination {d} must be an auxiliary or output word")
    return InstructionSequence(set_(d.kind, d.base + i, bool(value >> i & 1)) for i in range(32))


@lru_cache(maxsize=None)
def mov(s: WordRef, d: WordRef) -> InstructionSequence:
    _check((s,), d)
    items = []
    for i in range(32):
        items += [
            set_(d.kind, d.base + i, False),
            ptest(s.kind, s.base + i),
            set_(d.kind, d.base + i, True),
        ]
    return InstructionSequence(items)


# -- dispatch ----------------------------------------------------------------


def _arity(op: Op, srcs: Sequence[WordRef]) -> None:
    if len(srcs) != ARITY[op.name]:
        raise ArityError(f"{op} takes {ARITY[op.name]} operand(s), got {len(srcs)}")


def gen_basic(op: Op, srcs: Sequence[WordRef], dst: WordRef) -> InstructionSequence:
    if op.name not in BASIC_OPS:
        raise ValueError(f"{op} is not a basic operation")
    _arity(op, srcs)
    srcs = tuple(srcs)
    if op.name == "NOT":
        return not_(*srcs, dst)
    if op.name == "AND":
        return and_(*srcs, dst)
    if op.name == "XOR":
        return xor(*srcs, dst)
    if op.name == "ADD":
        return add(*srcs, dst)
    if op.name == "SHR":
        return shr(op.amount, *srcs, dst)
    return rotr(op.amount, *srcs, dst)


_DERIVED = {
    "CH": ch,
    "MAJ": maj,
    "BigSigma0": big_sigma0,
    "BigSigma1": big_sigma1,
    "SmallSigma0": small_sigma0,
    "SmallSigma1": small_sigma1,
}


def gen_derived(op: Op, srcs: Sequence[WordRef], dst: WordRef) -> InstructionSequence:
    if op.name not in DERIVED_OPS:
        raise ValueError(f"{op} is not a derived operation")
    _arity(op, srcs)
    return _DERIVED[op.name](*srcs, dst)


def gen_set(constant: int, dst: WordRef) -> InstructionSequence:
    return set_word(constant, dst)


def gen_mov(src: WordRef, dst: WordRef) -> InstructionSequence:
    return mov(src, dst)


def generate(op: Op, srcs: Sequence[WordRef], dst: WordRef) -> InstructionSequence:
    if op.name in BASIC_OPS:
        return gen_basic(op, srcs, dst)
    return gen_derived(op, srcs, dst)


# -- oracle ------------------------------------------------------------------


def _rotr(x: int, n: int) -> int:
    return ((x >> n) | (x << (32 - n))) & MASK


def word_oracle(op: Op, operands: Sequence[int]) -> int:
    """The operation computed directly on integers, for checking generated code."""
    if len(operands) != ARITY[op.name]:
        raise ArityError(f"{op} takes {ARITY[op.name]} operand(s), got {len(operands)}")
    xs = [x & MASK for x in operands]
    name = op.name
    if name == "NOT":
        return ~xs[0] & MASK
    if name == "AND":
        return xs[0] & xs[1]
    if name == "XOR":
        return xs[0] ^ xs[1]
    if name == "SHR":
        return xs[0] >> op.amount
    if name == "ROTR":
        return _rotr(xs[0], op.amount)
    if name == "ADD":
        return (xs[0] + xs[1]) & MASK
    if name == "CH":
        x, y, z = xs
        return (x & y) ^ (~x & z & MASK)
    if name == "MAJ":
        x, y, z = xs
        return (x & y) ^ (x & z) ^ (y & z)
    x = xs[0]
    if name == "BigSigma0":
        return _rotr(x, 2) ^ _rotr(x, 13) ^ _rotr(x, 22)
    if name == "BigSigma1":
        return _rotr(x, 6) ^ _rotr(x, 11) ^ _rotr(x, 25)
    if name == "SmallSigma0":
        return _rotr(x, 7) ^ _rotr(x, 18) ^ (x >> 3)
    if name == "SmallSigma1":
        return _rotr(x, 17) ^ _rotr(x, 19) ^ (x >> 10)
    raise ValueError(f"unknown operation {op}")
