import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgasha.machine import (
    Inaction,
    LimitExceeded,
    RegisterFile,
    RegisterRangeError,
    RunLimits,
    Terminated,
    decode,
    encode,
    execute,
    execute_segments,
    referenced_sizes,
)
from pgasha.program import (
    BasicInstruction,
    Halt,
    InstructionSequence,
    Jump,
    Kind,
    NegativeTest,
    Plain,
    PositiveTest,
    RegisterName,
    parse,
)

ENGINES = ["compiled", "reference"]


@pytest.fixture(params=ENGINES)
def engine(request):
    return request.param


def test_lone_termination(engine):
    out = execute(parse("!\n"), engine=engine)
    assert isinstance(out, Terminated)
    assert out.metrics.steps_executed == 1


def test_jump_zero_is_inaction(engine):
    out = execute(parse("#0\n"), engine=engine)
    assert isinstance(out, Inaction)
    assert out.position == 1


def test_empty_program_is_inaction(engine):
    out = execute(InstructionSequence(), engine=engine)
    assert isinstance(out, Inaction)
    assert out.metrics.steps_executed == 0


def test_positive_test_rule(engine):
    prog = parse("+in:1.get\n!\n")
    assert isinstance(execute(prog, [True], engine=engine), Terminated)
    out = execute(prog, [False], engine=engine)
    assert isinstance(out, Inaction)
    assert out.position == 3


def test_negative_test_rule(engine):
    prog = parse("-in:1.get\n!\n")
    assert isinstance(execute(prog, [False], engine=engine), Terminated)
    assert isinstance(execute(prog, [True], engine=engine), Inaction)


def test_plain_proceeds_regardless_of_reply(engine):
    prog = parse("in:1.get\naux:1.set:f\n!\n")
    for b in (False, True):
        assert isinstance(execute(prog, [b], engine=engine), Terminated)


def test_set_replies_with_written_value(engine):
    # +aux:1.set:t replies True so execution proceeds to the halt
    out = execute(parse("+aux:1.set:t\n!\n#0\n"), engine=engine)
    assert isinstance(out, Terminated)
    assert out.registers.aux[1] == 1
    out = execute(parse("+aux:1.set:f\n!\n#0\n"), engine=engine)
    assert isinstance(out, Inaction) and out.position == 3
    out = execute(parse("-out:1.set:f\n!\n#0\n"), engine=engine)
    assert isinstance(out, Terminated)


def test_jump_past_end_is_inaction(engine):
    out = execute(parse("#5\n!\n"), engine=engine)
    assert isinstance(out, Inaction)
    assert out.position == 6


def test_outputs_are_returned_on_termination(engine):
    out = execute(parse("out:2.set:t\n-in:1.get\nout:1.set:t\n!\n"), [False], engine=engine)
    assert isinstance(out, Terminated)
    assert out.outputs.tolist() == [True, True]


def test_copy_input_to_output(engine):
    prog = parse("out:1.set:f\n+in:1.get\nout:1.set:t\n!\n")
    for b in (False, True):
        assert execute(prog, [b], engine=engine).outputs.tolist() == [b]


def test_limit_exceeded(engine):
    prog = parse("aux:1.set:t\naux:1.set:t\naux:1.set:t\n!\n")
    out = execute(prog, limits=RunLimits(2), engine=engine)
    assert isinstance(out, LimitExceeded)
    assert out.position == 3
    assert out.metrics.steps_executed == 2
    assert isinstance(execute(prog, limits=RunLimits(4), engine=engine), Terminated)


def test_run_limits_validation():
    with pytest.raises(ValueError):
        RunLimits(0)


def test_out_of_range_register_is_an_error(engine):
    with pytest.raises(RegisterRangeError) as err:
        execute(parse("aux:1.set:t\naux:9.get\n!\n"), sizes=(0, 4), engine=engine)
    assert err.value.number == 9 and err.value.position == 2
    with pytest.raises(RegisterRangeError):
        execute(parse("in:3.get\n!\n"), [True], engine=engine)


def test_unexecuted_out_of_range_reference_is_harmless(engine):
    out = execute(parse("#2\naux:99.get\n!\n"), sizes=(0, 1), engine=engine)
    assert isinstance(out, Terminated)


def test_referenced_sizes():
    prog = parse("in:7.get\n+aux:12.set:t\nout:3.set:f\n#2\n!\n")
    assert referenced_sizes(prog) == (7, 3, 12)
    assert referenced_sizes(InstructionSequence()) == (0, 0, 0)


def test_touched_metrics(engine):
    out = execute(parse("in:2.get\naux:5.set:t\n#2\naux:9.set:t\nout:1.set:t\n!\n"),
                  [False, True], engine=engine)
    m = out.metrics
    assert (m.max_in_index_touched, m.max_out_index_touched, m.max_aux_index_touched) == (2, 1, 5)
    assert m.steps_executed == 5 and m.program_length == 6


def test_trace_needs_reference_engine():
    with pytest.raises(ValueError):
        execute(parse("!\n"), trace=[])


def test_trace_positions():
    trace = []
    execute(parse("-in:1.get\n#2\naux:1.set:t\n#1\n!\n"), [True], engine="reference", trace=trace)
    assert trace == [1, 3, 4, 5]


# random programs over a small register file, for cross-engine and property checks

N_IN, N_OUT, N_AUX = 4, 3, 5


@st.composite
def small_programs(draw):
    def basic():
        kind = draw(st.sampled_from([Kind.INPUT, Kind.OUTPUT, Kind.AUX]))
        if kind is Kind.INPUT:
            return BasicInstruction(RegisterName(kind, draw(st.integers(1, N_IN))))
        if kind is Kind.OUTPUT:
            return BasicInstruction(RegisterName(kind, draw(st.integers(1, N_OUT))), draw(st.booleans()))
        return BasicInstruction(RegisterName(kind, draw(st.integers(1, N_AUX))),
                                draw(st.one_of(st.none(), st.booleans())))

    items = []
    for _ in range(draw(st.integers(0, 30))):
        k = draw(st.integers(0, 9))
        if k < 3:
            items.append(Plain(basic()))
        elif k < 5:
            items.append(PositiveTest(basic()))
        elif k < 7:
            items.append(NegativeTest(basic()))
        elif k < 9:
            items.append(Jump(draw(st.integers(0, 6))))
        else:
            items.append(Halt())
    return InstructionSequence(items)


bits = st.lists(st.booleans(), min_size=N_IN, max_size=N_IN)
aux_bits = st.lists(st.booleans(), min_size=N_AUX, max_size=N_AUX)


def _summary(out):
    regs = out.registers
    return (type(out).__name__, getattr(out, "position", None), out.metrics,
            regs.outputs.tolist(), regs.aux.tolist())


@settings(max_examples=300)
@given(small_programs(), bits, aux_bits)
def test_engines_agree(prog, inputs, aux):
    a = execute(prog, inputs, (N_OUT, N_AUX), aux=aux, engine="compiled")
    b = execute(prog, inputs, (N_OUT, N_AUX), aux=aux, engine="reference")
    assert _summary(a) == _summary(b)


@settings(max_examples=300)
@given(small_programs(), bits, aux_bits)
def test_single_pass_and_determinism(prog, inputs, aux):
    trace = []
    out = execute(prog, inputs, (N_OUT, N_AUX), aux=aux, engine="reference", trace=trace)
    assert all(p < q for p, q in zip(trace, trace[1:]))
    assert out.metrics.steps_executed == len(trace) <= len(prog)
    assert not isinstance(out, LimitExceeded)
    again = execute(prog, inputs, (N_OUT, N_AUX), aux=aux, engine="reference")
    assert _summary(out) == _summary(again)


@settings(max_examples=200)
@given(small_programs(), bits, aux_bits)
def test_frame_property(prog, inputs, aux):
    trace = []
    out = execute(prog, inputs, (N_OUT, N_AUX), aux=aux, engine="reference", trace=trace)
    named = {(prog[p - 1].basic.register.kind, prog[p - 1].basic.register.number)
             for p in trace if hasattr(prog[p - 1], "basic")}
    for n in range(1, N_AUX + 1):
        if (Kind.AUX, n) not in named:
            assert out.registers.aux[n] == aux[n - 1]
    for n in range(1, N_OUT + 1):
        if (Kind.OUTPUT, n) not in named:
            assert out.registers.outputs[n] == 0
    assert out.registers.inputs[1:].tolist() == inputs


@settings(max_examples=200)
@given(small_programs(), st.integers(0, 30), bits)
def test_segmented_run_equals_whole_run(prog, cut, inputs):
    cut = min(cut, len(prog))
    whole = execute(prog, inputs, (N_OUT, N_AUX))
    for engine in ENGINES:
        regs = RegisterFile.create(inputs, N_OUT, N_AUX)
        parts = [prog[:cut], prog[cut:]]
        if engine == "compiled":
            parts = [encode(p) for p in parts]
        split = execute_segments(parts, regs, len(prog) or 1, engine)
        assert _summary(split) == _summary(whole)


@given(small_programs())
def test_encode_decode_roundtrip(prog):
    assert decode(encode(prog)) == prog


def test_register_file_words():
    regs = RegisterFile.create([], 0, 64)
    regs.write_word(Kind.AUX, 33, 0x80000001)
    assert regs.aux[33] == 1 and regs.aux[64] == 1 and regs.aux[34:64].sum() == 0
    assert regs.read_word(Kind.AUX, 33) == 0x80000001
    with pytest.raises(ValueError):
        RegisterFile.create([], 0, 2, aux=[True] * 3)
    assert np.array_equal(regs.copy().aux, regs.aux)
