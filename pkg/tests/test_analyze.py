import numpy as np
import pytest

from helpers import brute_must, input_words
from qdsynth import dfa as D
from qdsynth.analyze import (
    EQUIVALENT, INCOMPARABLE, RIGHT, Dtmc, build_dtmc, expected_value, export_mrmc,
    long_run_value, monte_carlo_value, must_dominance, must_inputs, read_trace, simulate,
    write_trace,
)
from qdsynth.casestudies import arbiter, minepump
from qdsynth.compile import Compiler, compile_formula
from qdsynth.formula import TrueF
from qdsynth.parser import parse_formula
from qdsynth.robust import Criterion, lower
from qdsynth.synth import IoSignature, SignatureMismatch, SynthParams, det_by_order, mphos, mps


def _synth(cs, crit, stage="mps"):
    low = lower(cs.robust(crit))
    io = IoSignature(low.inputs, low.outputs)
    c = Compiler(io.vars)
    sup = mps(compile_formula(low.hard, io.vars, c), io)
    if stage == "mphos":
        sup = mphos(sup, compile_formula(low.soft, io.vars, c), SynthParams())
    return sup, compile_formula(cs.commitment, io.vars, c)


@pytest.fixture(scope="module")
def arb2():
    return _synth(arbiter(2, 2, 1), Criterion("BeCorrect"))


def test_must_inputs_against_enumeration(arb2):
    sup, commit = arb2
    must = must_inputs(sup, commit)
    assert must.vars == ("r1", "r2")
    for word in input_words(2, 4):
        letters = [D.letter_set(("r1", "r2"), i) for i in word]
        assert D.accepts(must, letters) == brute_must(sup, commit, 4, 8, word), word


def test_must_inputs_assumption_violation(arb2):
    sup, commit = arb2
    must = must_inputs(sup, commit)
    assert not D.accepts(must, [{"r1", "r2"}])
    assert D.accepts(must, [{"r1"}, {"r2"}, set(), {"r1"}])


def test_must_inputs_true_commit(arb2):
    sup, _ = arb2
    assert D.is_universal(must_inputs(sup, compile_formula(TrueF(), sup.io.vars)))


def test_dominance_identical(arb2):
    sup, commit = arb2
    r = must_dominance(sup, sup, commit)
    assert r.verdict == EQUIVALENT and r.only_left is None and r.only_right is None


def test_dominance_follows_implication_order():
    cs = arbiter(4, 3, 2)
    s1, commit = _synth(cs, Criterion("BeCorrect"))
    s2, _ = _synth(cs, Criterion("BeCurrentlyCorrect"))
    r = must_dominance(s1, s2, commit)
    assert r.verdict == RIGHT
    assert r.only_right is not None


def test_dominance_mphos_incomparable():
    cs = arbiter(4, 3, 2)
    s1, commit = _synth(cs, Criterion("BeCorrect"), "mphos")
    s2, _ = _synth(cs, Criterion("BeCurrentlyCorrect"), "mphos")
    r = must_dominance(s1, s2, commit)
    assert r.verdict == INCOMPARABLE
    # witnesses are checked against the other supervisor
    m1, m2 = must_inputs(s1, commit), must_inputs(s2, commit)
    assert D.accepts(m1, r.only_left) and not D.accepts(m2, r.only_left)
    assert D.accepts(m2, r.only_right) and not D.accepts(m1, r.only_right)


def test_dominance_signature_mismatch(arb2):
    sup, commit = arb2
    other, _ = _synth(arbiter(3, 3, 1), Criterion("BeCorrect"))
    with pytest.raises(SignatureMismatch):
        must_dominance(sup, other, commit)


def _cesaro(m: Dtmc, steps=20000):
    P = m.matrix().toarray()
    x = np.zeros(m.n_states)
    x[m.initial] = 1.0
    acc = m.accepting.astype(float)
    total = 0.0
    for _ in range(steps):
        x = x @ P
        total += x @ acc
    return total / steps


def test_small_chains():
    absorbing = Dtmc(np.array([[0, 0]]), np.array([True]), 0)
    assert long_run_value(absorbing) == 1.0
    flip = Dtmc(np.array([[1], [0]]), np.array([True, False]), 0)
    assert long_run_value(flip) == pytest.approx(0.5, abs=1e-12)
    # transient start absorbed into two bottom components with equal chance
    split = Dtmc(np.array([[1, 2], [1, 1], [2, 2]]), np.array([False, True, False]), 0)
    assert long_run_value(split) == pytest.approx(0.5, abs=1e-12)


def test_random_chains_against_cesaro():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        m = Dtmc(rng.integers(0, n, size=(n, 2)), rng.random(n) < 0.5, 0)
        assert long_run_value(m) == pytest.approx(_cesaro(m), abs=2e-3)


def test_dtmc_rows_uniform(arb2):
    sup, _ = arb2
    cnt = det_by_order(sup, ["a1", "a2"])
    m = build_dtmc(cnt, compile_formula(TrueF(), ()))
    for row in m.rows():
        assert sum(p for p, _ in row) == pytest.approx(1.0)
        assert all(p in (0.25, 0.5, 0.75, 1.0) for p, _ in row)
    assert long_run_value(m) == 1.0


def test_arbiter_becurrentlycorrect_value():
    sup, commit = _synth(arbiter(4, 3, 2), Criterion("BeCurrentlyCorrect"))
    cnt = det_by_order(sup, ["a1", "a2", "a3", "a4"])
    v = expected_value(cnt, commit)
    assert abs(v - 11 / 16) < 1e-9
    mc = monte_carlo_value(build_dtmc(cnt, commit), 400_000, np.random.default_rng(0))
    assert abs(mc - v) < 3e-3


def test_minepump_becurrentlycorrect_value():
    sup, commit = _synth(minepump(8, 2, 6, 2), Criterion("BeCurrentlyCorrect"))
    cnt = det_by_order(sup, ["PumpOn"])
    assert abs(expected_value(cnt, commit) - 0.997070) < 1e-6


def test_expected_value_needs_controller(arb2):
    sup, commit = arb2
    with pytest.raises(ValueError):
        expected_value(sup, commit)


def test_mrmc_export():
    m = Dtmc(np.array([[1, 1], [0, 1]]), np.array([False, True]), 0)
    tra, lab = export_mrmc(m)
    lines = tra.splitlines()
    assert lines[:2] == ["STATES 2", "TRANSITIONS 3"]
    assert lines[2:] == ["1 2 1.000000", "2 1 0.500000", "2 2 0.500000"]
    assert lab.splitlines() == ["#DECLARATION", "target", "#END", "2 target"]


def test_simulate_all_zero_inputs():
    sup, commit = _synth(arbiter(4, 3, 2), Criterion("BeCorrect"), "mphos")
    cnt = det_by_order(sup, ["a1", "a2", "a3", "a4"])
    rows = [{f"r{j}": 0 for j in range(1, 5)} for _ in range(10)]
    spur = compile_formula(parse_formula("true^<(a1 => r1) && (a2 => r2) && (a3 => r3) && (a4 => r4)>"),
                           cnt.io.vars)
    out = simulate(cnt, rows, [("nospur", spur)])
    assert all(r[f"a{j}"] == 0 for r in out for j in range(1, 5))
    assert all(r["nospur"] == 1 for r in out)


def test_trace_io_round_trip():
    sup, _ = _synth(arbiter(2, 2, 1), Criterion("BeCorrect"))
    cnt = det_by_order(sup, ["a1"])
    text = "r1,r2\n1,0\n0,1\n1,1\n"
    rows = simulate(cnt, read_trace(text))
    cols = ["r1", "r2", "a1", "a2", "A"]
    again = read_trace(write_trace(rows, cols))
    assert [int(r["r1"]) for r in again] == [1, 0, 1]
    with pytest.raises(SignatureMismatch):
        simulate(cnt, read_trace("r1\n1\n"))
