"""Hashing a message end to end by running the generated program."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from . import machine, sha256
from .machine import ExecutionOutcome, RegisterFile, RunMetrics, Terminated
from .reference import MAX_MESSAGE_BITS, MessageTooLongError, reference_sha256

__all__ = [
    "DigestMismatchError",
    "HashResult",
    "MessageTooLongError",
    "RunNotTerminatedError",
    "extract_digest",
    "hash_message",
    "load_input_registers",
    "pad_message",
    "program_segments",
    "reference_sha256",
]


class RunNotTerminatedError(RuntimeError):
    pass


class DigestMismatchError(AssertionError):
    def __init__(self, got: bytes, expected: bytes) -> None:
        super().__init__(f"program produced {got.hex()}, reference gives {expected.hex()}")
        self.got = got
        self.expected = expected


def pad_message(message: bytes) -> bytes:
    """Append the 1 bit, zero bits and the 64-bit big-endian bit length."""
    bits = len(message) * 8
    if bits >= MAX_MESSAGE_BITS:
        raise MessageTooLongError("message bit length must be below 2**64")
    zeros = (447 - bits) % 512
    return message + b"\x80" + bytes((zeros - 7) // 8) + struct.pack(">Q", bits)


def load_input_registers(padded: bytes) -> np.ndarray:
    """Input register contents for a padded message, as a bool array (register 1 first).

    Each big-endian 32-bit word of the message is stored least significant
    bit first in its 32 registers.
    """
    if len(padded) % 64:
        raise ValueError(f"padded message must be a multiple of 512 bits, got {len(padded) * 8}")
    words = np.frombuffer(padded, dtype=">u4").astype(np.uint32)
    bits = (words[:, None] >> np.arange(32, dtype=np.uint32)) & 1
    return bits.reshape(-1).astype(bool)


def extract_digest(result: ExecutionOutcome | np.ndarray) -> bytes:
    """Read the 256 output registers as the 32-byte digest."""
    if isinstance(result, np.ndarray):
        outputs = result
    elif isinstance(result, Terminated):
        outputs = result.outputs
    else:
        raise RunNotTerminatedError(f"program did not terminate: {result!r}")
    outputs = np.asarray(outputs, dtype=np.uint32)
    if outputs.shape != (256,):
        raise ValueError(f"expected 256 output bits, got {outputs.shape[0]}")
    words = (outputs.reshape(8, 32) << np.arange(32, dtype=np.uint32)).sum(axis=1, dtype=np.uint32)
    return words.astype(">u4").tobytes()


@lru_cache(maxsize=1)
def _encoded_parts():
    load = machine.encode(sha256.block_load(1))
    ops = load & 7
    is_input = (ops < machine.OP_JUMP) & (((load >> 5) & 3) == machine.KIND_IN)
    return (
        machine.encode(sha256.prelude()),
        load,
        is_input.astype(np.int64) << 8,
        machine.encode(sha256.block_tail()),
        machine.encode(sha256.epilogue()),
    )


def program_segments(n: int, engine: str = "compiled",
                     cap: int | None = sha256.DEFAULT_BLOCK_CAP) -> Iterator:
    """The N-block program as consecutive segments ready for execution.

    For the compiled engine the segments are encodings. The per-block load
    is obtained from block 1's by offsetting its input register numbers,
    so only the shared block tail is ever encoded in full.
    """
    if engine == "reference":
        yield from sha256.iter_chunks(n, cap)
        return
    sha256._check_blocks(n, cap)
    pre, load, shift, tail, epi = _encoded_parts()
    yield pre
    for i in range(1, n + 1):
        yield load + shift * (512 * (i - 1))
        yield tail
    yield epi


@dataclass(frozen=True)
class HashResult:
    digest: bytes
    blocks: int
    metrics: RunMetrics
    verified: bool

    @property
    def hexdigest(self) -> str:
        return self.digest.hex()


def hash_message(message: bytes, *, verify: bool = True, engine: str = "compiled",
                 cap: int | None = sha256.DEFAULT_BLOCK_CAP) -> HashResult:
    padded = pad_message(message)
    n = len(padded) // 64
    inputs = load_input_registers(padded)
    regs = RegisterFile.create(inputs, sha256.OUTPUT_REGISTERS, sha256.AUX_REGISTERS)
    outcome = machine.execute_segments(program_segments(n, engine, cap), regs, engine=engine)
    digest = extract_digest(outcome)
    if verify:
        expected = reference_sha256(message)
        if digest != expected:
            raise DigestMismatchError(digest, expected)
    return HashResult(digest, n, outcome.metrics, verify)
