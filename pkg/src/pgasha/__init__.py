"""SHA-256 computed by single-pass instruction sequences over Boolean registers."""

from .harness import HashResult, extract_digest, hash_message, load_input_registers, pad_message
from .machine import execute
from .program import InstructionSequence, concat, parse, serialize
from .reference import reference_sha256
from .sha256 import expected_length, generate_sha256

__all__ = [
    "HashResult",
    "InstructionSequence",
    "concat",
    "execute",
    "expected_length",
    "extract_digest",
    "generate_sha256",
    "hash_message",
    "load_input_registers",
    "pad_message",
    "parse",
    "reference_sha256",
    "serialize",
]
