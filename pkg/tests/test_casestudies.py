import pytest

from helpers import oracle_mismatches
from qdsynth import dfa as D
from qdsynth import semantics as S
from qdsynth.casestudies import (
    MINE_INPUTS, MINE_OUTPUTS, arbiter, arbiter_commit, arbiter_qsf, atmost, minepump,
    minepump_qsf, response,
)
from qdsynth.compile import compile_formula, prop_table
from qdsynth.formula import free_vars
from qdsynth.parser import expand, expand_formula, parse_spec
from qdsynth.robust import Criterion, lower
from qdsynth.synth import IoSignature


def test_atmost_truth_table():
    names = ["r1", "r2", "r3", "r4"]
    t = prop_table(atmost(names, 2), names)
    assert int(t.sum()) == 11
    for code, v in enumerate(t):
        assert v == (bin(code).count("1") <= 2)


def test_arbiter_signature():
    cs = arbiter(4, 3, 2)
    assert cs.inputs == ("r1", "r2", "r3", "r4")
    assert cs.outputs == cs.default_order == ("a1", "a2", "a3", "a4")
    assert free_vars(cs.commitment) == set(cs.inputs) | set(cs.outputs)
    with pytest.raises(ValueError):
        arbiter(2, 2, 3)


def test_arbiter_commit_against_oracle():
    env = ("r1", "r2", "a1", "a2")
    assert oracle_mismatches(arbiter_commit(2, 2), env, 4) == []


def test_response_by_hand():
    f = response("r", "a", 3)
    W = S.make_word
    assert S.whole_word(W([{"r"}, {"r"}]), f)  # window not yet full
    assert not S.whole_word(W([{"r"}, {"r"}, {"r"}]), f)
    assert S.whole_word(W([{"r"}, {"r", "a"}, {"r"}]), f)
    assert S.whole_word(W([set(), {"r"}, {"r"}]), f)


def test_minepump_signature():
    cs = minepump(8, 2, 6, 2)
    assert cs.inputs == MINE_INPUTS and cs.outputs == MINE_OUTPUTS
    assert free_vars(cs.assumption) == {"HH2O", "HCH4", "PumpOn"}
    assert free_vars(cs.commitment) == {"HH2O", "HCH4", "PumpOn"}
    with pytest.raises(ValueError):
        minepump(0, 2, 6, 2)


def test_minepump_safety_conjunct():
    cs = minepump(3, 1, 2, 1, window=3)
    W = S.make_word
    assert not S.whole_word(W([{"HCH4", "HH2O", "PumpOn"}]), cs.commitment)
    assert S.whole_word(W([{"HCH4", "HH2O"}]), cs.commitment)
    # water high for w consecutive cycles violates the commitment
    assert not S.whole_word(W([{"HH2O"}] * 4), cs.commitment)


def test_minepump_small_against_oracle():
    cs = minepump(2, 1, 2, 1, window=2)
    env = ("HH2O", "HCH4", "PumpOn")
    assert oracle_mismatches(cs.commitment, env, 4) == []
    assert oracle_mismatches(cs.assumption, env, 4) == []


@pytest.mark.parametrize("crit", [Criterion("BeCurrentlyCorrect"), Criterion("LenCntInt", 1, 3)])
def test_arbiter_qsf_matches_generator(crit):
    spec = parse_spec(arbiter_qsf(3, 2, 1, crit))
    assert spec.inputs == ["r1", "r2", "r3"]
    assert spec.outputs == ["a1", "a2", "a3", "A", "C"]
    cs = arbiter(3, 2, 1)
    env = cs.inputs + cs.outputs
    got_c = compile_formula(expand_formula(spec.indicator_defs["C"], spec), env)
    got_a = compile_formula(expand_formula(spec.indicator_defs["A"], spec), env)
    assert D.equivalent(got_c, compile_formula(cs.commitment, env))
    assert D.equivalent(got_a, compile_formula(cs.assumption, env))
    assert "A" in free_vars(expand(spec).hard)


def test_minepump_qsf_matches_generator():
    spec = parse_spec(minepump_qsf(3, 1, 2, 1, Criterion("BeCorrect"), window=3))
    cs = minepump(3, 1, 2, 1, window=3)
    env = cs.inputs + cs.outputs
    for w, f in (("A", cs.assumption), ("C", cs.commitment)):
        got = compile_formula(expand_formula(spec.indicator_defs[w], spec), env)
        assert D.equivalent(got, compile_formula(f, env))


def test_lowered_arbiter_compiles():
    low = lower(arbiter(4, 3, 2).robust(Criterion("BeCurrentlyCorrect")))
    io = IoSignature(low.inputs, low.outputs)
    a = compile_formula(low.hard, io.vars)
    assert a.n_states > 1


def test_window_default():
    assert minepump(8, 2, 6, 2) == minepump(8, 2, 6, 2, window=9)
