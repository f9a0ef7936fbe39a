"""The instruction sequence computing SHA-256 on messages of N blocks.

Register allocation (word bases; ``cb`` is a single bit)::

    M(i, j)   in:512(i-1)+32j+1       W(j)   aux:32j+1
    H(j)      aux:32j+2049            a..h   aux:2305 .. aux:2529
    T1, T2    aux:2561, aux:2593      t1..t6 aux:2625 .. aux:2785
    t'1..t'4  aux:2817 .. aux:2913    cb     aux:2945
    D(j)      out:32j+1

The program is a flat concatenation: 8 constant loads, one body per
block, 8 moves to the output registers and a termination instruction.
Block bodies differ only in the 16 moves reading the message block, so
the rest of the body is built once and shared.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator, TextIO

from .program import InstructionSequence, Kind, concat, halt, serialize
from .words import (
    SCRATCH,
    WordRef,
    add,
    big_sigma0,
    big_sigma1,
    ch,
    maj,
    mov,
    set_word,
    small_sigma0,
    small_sigma1,
)

MAX_BLOCKS = 2**55
DEFAULT_BLOCK_CAP = 2**16

AUX_REGISTERS = 2945
OUTPUT_REGISTERS = 256
INPUT_REGISTERS_PER_BLOCK = 512

INITIAL_HASH = (
    0x6A09E667, 0xBB67AE85, 0x3C6EF372, 0xA54FF53A,
    0x510E527F, 0x9B05688C, 0x1F83D9AB, 0x5BE0CD19,
)

# fmt: off
ROUND_CONSTANTS = (
    0x428A2F98, 0x71374491, 0xB5C0FBCF, 0xE9B5DBA5, 0x3956C25B, 0x59F111F1, 0x923F82A4, 0xAB1C5ED5,
    0xD807AA98, 0x12835B01, 0x243185BE, 0x550C7DC3, 0x72BE5D74, 0x80DEB1FE, 0x9BDC06A7, 0xC19BF174,
    0xE49B69C1, 0xEFBE4786, 0x0FC19DC6, 0x240CA1CC, 0x2DE92C6F, 0x4A7484AA, 0x5CB0A9DC, 0x76F988DA,
    0x983E5152, 0xA831C66D, 0xB00327C8, 0xBF597FC7, 0xC6E00BF3, 0xD5A79147, 0x06CA6351, 0x14292967,
    0x27B70A85, 0x2E1B2138, 0x4D2C6DFC, 0x53380D13, 0x650A7354, 0x766A0ABB, 0x81C2C92E, 0x92722C85,
    0xA2BFE8A1, 0xA81A664B, 0xC24B8B70, 0xC76C51A3, 0xD192E819, 0xD6990624, 0xF40E3585, 0x106AA070,
    0x19A4C116, 0x1E376C08, 0x2748774C, 0x34B0BCB5, 0x391C0CB3, 0x4ED8AA4A, 0x5B9CCA4F, 0x682E6FF3,
    0x748F82EE, 0x78A5636F, 0x84C87814, 0x8CC70208, 0x90BEFFFA, 0xA4506CEB, 0xBEF9A3F7, 0xC67178F2,
)
# fmt: on


class BlockCountError(ValueError):
    pass


class UnknownSymbolError(KeyError):
    pass


def constant_word(name: str) -> int:
    """Look up ``"H0".."H7"`` (initial hash value) or ``"K0".."K63"``."""
    table = {"H": INITIAL_HASH, "K": ROUND_CONSTANTS}.get(name[:1])
    if table is not None and name[1:].isdigit():
        j = int(name[1:])
        if j < len(table) and name[1:] == str(j):
            return table[j]
    raise UnknownSymbolError(name)


_FIXED = {
    "a": 2305, "b": 2337, "c": 2369, "d": 2401,
    "e": 2433, "f": 2465, "g": 2497, "h": 2529,
    "T1": 2561, "T2": 2593,
    "t1": 2625, "t2": 2657, "t3": 2689, "t4": 2721, "t5": 2753, "t6": 2785,
    "t'1": 2817, "t'2": 2849, "t'3": 2881, "t'4": 2913,
    "cb": 2945,
}


def _index(sym: str, j: int, hi: int) -> int:
    if not 0 <= j <= hi:
        raise UnknownSymbolError(f"{sym} index {j} outside 0..{hi}")
    return j


def register_map(sym: str, *indices: int) -> WordRef:
    """Word holding the named SHA-256 quantity.

    ``register_map("M", i, j)`` for message words, ``register_map("W", j)``,
    ``("H", j)`` and ``("D", j)`` for the indexed families, and plain
    names such as ``"a"``, ``"T1"``, ``"t3"``, ``"t'2"`` or ``"cb"``.
    The carry bit ``cb`` is a single register; its WordRef names the
    register as a base only.
    """
    if sym == "M":
        if len(indices) != 2:
            raise UnknownSymbolError("M takes a block index and a word index")
        i, j = indices
        if not 1 <= i <= MAX_BLOCKS:
            raise UnknownSymbolError(f"block index {i} outside 1..2**55")
        return WordRef(Kind.INPUT, 512 * (i - 1) + 32 * _index(sym, j, 15) + 1)
    limits = {"W": 63, "H": 7, "D": 7}
    if sym in limits:
        if len(indices) != 1:
            raise UnknownSymbolError(f"{sym} takes one index")
        j = _index(sym, indices[0], limits[sym])
        if sym == "W":
            return WordRef(Kind.AUX, 32 * j + 1)
        if sym == "H":
            return WordRef(Kind.AUX, 32 * j + 2049)
        return WordRef(Kind.OUTPUT, 32 * j + 1)
    if sym in _FIXED and not indices:
        return WordRef(Kind.AUX, _FIXED[sym])
    raise UnknownSymbolError(sym)


def M(i: int, j: int) -> WordRef:
    return register_map("M", i, j)


W = tuple(register_map("W", j) for j in range(64))
H = tuple(register_map("H", j) for j in range(8))
D = tuple(register_map("D", j) for j in range(8))
A, B, C, D_, E, F, G, H_ = (register_map(s) for s in "abcdefgh")
WORKING = (A, B, C, D_, E, F, G, H_)
T1, T2 = register_map("T1"), register_map("T2")
t1, t2, t3, t4, t5, t6 = (register_map(f"t{k}") for k in range(1, 7))
assert SCRATCH == tuple(register_map(f"t'{k}") for k in range(1, 5))


def _check_blocks(n: int, cap: int | None) -> None:
    if not 1 <= n <= MAX_BLOCKS:
        raise BlockCountError(f"block count must satisfy 1 <= N <= 2**55, got {n}")
    if cap is not None and n > cap:
        raise BlockCountError(f"block count {n} exceeds the configured cap of {cap}")


@lru_cache(maxsize=1)
def prelude() -> InstructionSequence:
    return concat(set_word(INITIAL_HASH[j], H[j]) for j in range(8))


@lru_cache(maxsize=1)
def epilogue() -> InstructionSequence:
    return concat([*(mov(H[j], D[j]) for j in range(8)), InstructionSequence([halt()])])


def block_load(i: int) -> InstructionSequence:
    """The 16 moves copying message block *i* into W0..W15."""
    return concat(mov(M(i, j), W[j]) for j in range(16))


@lru_cache(maxsize=1)
def block_tail() -> InstructionSequence:
    """Schedule expansion, 64 rounds and the hash update (shared by all blocks)."""
    parts = []
    for j in range(16, 64):
        parts += [
            small_sigma1(W[j - 2], t1), small_sigma0(W[j - 15], t2),
            add(t1, W[j - 7], t3), add(t2, W[j - 16], t4), add(t3, t4, W[j]),
        ]
    parts += [mov(H[k], WORKING[k]) for k in range(8)]
    for j in range(64):
        parts += [
            big_sigma1(E, t1), ch(E, F, G, t2), set_word(ROUND_CONSTANTS[j], t3),
            add(t1, H_, t4), add(t2, t3, t5), add(t5, W[j], t6), add(t4, t6, T1),
            big_sigma0(A, t1), maj(A, B, C, t2), add(t1, t2, T2),
            mov(G, H_), mov(F, G), mov(E, F), add(D_, T1, E),
            mov(C, D_), mov(B, C), mov(A, B), add(T1, T2, A),
        ]
    for k in range(8):
        parts += [mov(H[k], t1), add(WORKING[k], t1, H[k])]
    return concat(parts)


def block(i: int) -> InstructionSequence:
    return block_load(i) + block_tail()


def iter_chunks(n: int, cap: int | None = DEFAULT_BLOCK_CAP) -> Iterator[InstructionSequence]:
    """Yield the program for *n* blocks as consecutive pieces, block by block."""
    _check_blocks(n, cap)
    yield prelude()
    for i in range(1, n + 1):
        yield block(i)
    yield epilogue()


def generate_sha256(n: int, cap: int | None = DEFAULT_BLOCK_CAP) -> InstructionSequence:
    return concat(iter_chunks(n, cap))


def expected_length(n: int) -> int:
    """Program length for *n* blocks, checked against the per-operation tally."""
    if n < 1:
        raise BlockCountError(f"block count must be positive, got {n}")
    closed = 780152 * n + 1025
    tally = (
        8 * 32
        + n * (
            16 * 96
            + 48 * (844 + 858 + 3 * 705)
            + 8 * 96
            + 64 * (864 + 768 + 32 + 4 * 705 + 864 + 1152 + 705 + 3 * 96 + 705 + 3 * 96 + 705)
            + 8 * (96 + 705)
        )
        + 8 * 96
        + 1
    )
    if tally != closed:
        raise AssertionError(f"length tally {tally} disagrees with closed form {closed}")
    return closed


@lru_cache(maxsize=1)
def _tail_text() -> str:
    return serialize(block_tail())


def write_program(n: int, out: TextIO, cap: int | None = DEFAULT_BLOCK_CAP) -> int:
    """Stream the N-block program to *out* in the text format; returns its length."""
    _check_blocks(n, cap)
    out.write(serialize(prelude()))
    for i in range(1, n + 1):
        out.write(serialize(block_load(i)))
        out.write(_tail_text())
    out.write(serialize(epilogue()))
    return expected_length(n)
