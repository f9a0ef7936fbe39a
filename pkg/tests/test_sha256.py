import numpy as np
import pytest

from pgasha import machine, sha256
from pgasha.harness import program_segments
from pgasha.program import Halt, Kind, Plain, concat, serialize
from pgasha.sha256 import (
    BlockCountError,
    UnknownSymbolError,
    constant_word,
    expected_length,
    generate_sha256,
    register_map,
)
from pgasha.words import WordRef
from printed_constants import INITIAL_HASH_BITS, ROUND_CONSTANT_BITS


@pytest.mark.parametrize("args, kind, base", [
    (("M", 1, 0), Kind.INPUT, 1),
    (("M", 1, 15), Kind.INPUT, 481),
    (("M", 3, 2), Kind.INPUT, 1089),
    (("W", 0), Kind.AUX, 1),
    (("W", 63), Kind.AUX, 2017),
    (("H", 0), Kind.AUX, 2049),
    (("H", 7), Kind.AUX, 2273),
    (("a",), Kind.AUX, 2305),
    (("h",), Kind.AUX, 2529),
    (("T1",), Kind.AUX, 2561),
    (("T2",), Kind.AUX, 2593),
    (("t1",), Kind.AUX, 2625),
    (("t6",), Kind.AUX, 2785),
    (("t'1",), Kind.AUX, 2817),
    (("t'4",), Kind.AUX, 2913),
    (("cb",), Kind.AUX, 2945),
    (("D", 0), Kind.OUTPUT, 1),
    (("D", 7), Kind.OUTPUT, 225),
])
def test_register_map(args, kind, base):
    assert register_map(*args) == WordRef(kind, base)


def test_working_variables_are_consecutive_words():
    bases = [register_map(s).base for s in "abcdefgh"]
    assert bases == list(range(2305, 2530, 32))


@pytest.mark.parametrize("args", [
    ("M", 0, 0), ("M", 1, 16), ("M", 2**55 + 1, 0), ("W", 64), ("H", 8), ("D", -1),
    ("x",), ("t7",), ("a", 1), ("M", 1),
])
def test_register_map_rejects(args):
    with pytest.raises(UnknownSymbolError):
        register_map(*args)


def test_constants_match_printed_bit_strings():
    for j, bits in enumerate(INITIAL_HASH_BITS):
        assert constant_word(f"H{j}") == int(bits, 2)
    for j, bits in enumerate(ROUND_CONSTANT_BITS):
        assert constant_word(f"K{j}") == int(bits, 2)
    assert constant_word("H0") == 0x6A09E667
    assert constant_word("K1") == 0x71374491
    assert constant_word("K63") == 0xC67178F2


@pytest.mark.parametrize("name", ["K64", "H8", "X1", "K", "K01", ""])
def test_unknown_constant(name):
    with pytest.raises(UnknownSymbolError):
        constant_word(name)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_length_fact(n):
    assert len(generate_sha256(n)) == expected_length(n) == 780152 * n + 1025


def test_expected_length_examples():
    assert expected_length(1) == 781177
    assert expected_length(2) == 1561329
    assert expected_length(2**55) == 780152 * 2**55 + 1025
    assert 2.8e22 < expected_length(2**55) < 2.9e22
    with pytest.raises(BlockCountError):
        expected_length(0)


def test_layout_of_the_program():
    prog = generate_sha256(2)
    head = prog[:256]
    assert all(isinstance(i, Plain) and not i.basic.is_get for i in head)
    assert head == concat(sha256.set_word(sha256.INITIAL_HASH[j], sha256.H[j]) for j in range(8))
    assert isinstance(prog[-1], Halt)
    assert sum(isinstance(i, Halt) for i in prog) == 1
    assert prog[256:256 + 96] == sha256.mov(sha256.M(1, 0), sha256.W[0])
    second = 256 + 780152
    assert prog[second:second + 96] == sha256.mov(sha256.M(2, 0), sha256.W[0])
    assert prog[-1 - 768:-1] == concat(sha256.mov(sha256.H[j], sha256.D[j]) for j in range(8))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_register_counts(n):
    sizes = machine.referenced_sizes(generate_sha256(n))
    assert sizes == (512 * n, 256, 2945)


def test_block_count_bounds():
    with pytest.raises(BlockCountError):
        generate_sha256(0)
    with pytest.raises(BlockCountError):
        generate_sha256(5, cap=4)
    with pytest.raises(BlockCountError):
        list(sha256.iter_chunks(2**55 + 1, cap=None))


def test_encoded_segments_equal_the_generated_program():
    n = 3
    segs = list(program_segments(n))
    assert np.array_equal(np.concatenate(segs), machine.encode(generate_sha256(n)))
    ref = list(program_segments(n, engine="reference"))
    assert concat(ref) == generate_sha256(n)


def test_write_program_matches_serialize(tmp_path):
    path = tmp_path / "p.txt"
    with open(path, "w", newline="\n") as fh:
        assert sha256.write_program(2, fh) == 1561329
    assert path.read_text() == serialize(generate_sha256(2))
