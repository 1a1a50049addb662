import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdsynth import dfa as D
from qdsynth.compile import compile_formula
from qdsynth.parser import parse_formula
from qdsynth.robust import count_err


@st.composite
def automata(draw, vars=("p", "q")):
    k = draw(st.integers(0, len(vars)))
    vs = vars[:k]
    n = draw(st.integers(1, 6))
    L = 1 << k
    delta = draw(st.lists(st.lists(st.integers(0, n - 1), min_size=L, max_size=L), min_size=n, max_size=n))
    acc = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    init = draw(st.integers(0, n - 1))
    return D.Dfa(vs, np.array(delta), acc, init)


def words(vars, max_len):
    letters = [D.letter_set(vars, c) for c in range(1 << len(vars))]
    for n in range(1, max_len + 1):
        yield from itertools.product(letters, repeat=n)


def language(a, max_len=5):
    return {w for w in words(a.vars, max_len) if D.accepts(a, w)}


def brute(vars, max_len, pred):
    return {w for w in words(vars, max_len) if pred(w)}


@settings(max_examples=100, deadline=None)
@given(automata())
def test_minimize_preserves_language_and_is_idempotent(a):
    m = D.minimize(a)
    assert language(m) == language(a)
    assert m.n_states <= a.n_states + 1  # the pre-initial copy may add one state
    m2 = D.minimize(m)
    assert m2.n_states == m.n_states
    assert np.array_equal(m2.delta, m.delta) and np.array_equal(m2.accepting, m.accepting)


@settings(max_examples=60, deadline=None)
@given(automata())
def test_minimal_automata_are_canonical(a):
    # two different automata with the same language minimize to identical tables
    b = D.Dfa(a.vars, np.vstack([a.delta, a.delta]), np.concatenate([a.accepting, a.accepting]), a.initial)
    ma, mb = D.minimize(a), D.minimize(b)
    assert np.array_equal(ma.delta, mb.delta) and np.array_equal(ma.accepting, mb.accepting)


@settings(max_examples=60, deadline=None)
@given(automata(), automata())
def test_boolean_products(a, b):
    a2, b2 = D.extend(a, ("p", "q")), D.extend(b, ("p", "q"))
    la, lb = language(a2, 4), language(b2, 4)
    assert language(D.product(a2, b2, "and"), 4) == la & lb
    assert language(D.product(a2, b2, "or"), 4) == la | lb
    assert language(D.product(a2, b2, "diff"), 4) == la - lb
    assert language(D.product(a2, b2, "xor"), 4) == la ^ lb
    assert D.product(a2, b2, "and").n_states <= (a2.n_states + 1) * (b2.n_states + 1)


@settings(max_examples=60, deadline=None)
@given(automata())
def test_complement(a):
    c = D.complement(a)
    all_words = set(words(a.vars, 4))
    assert language(c, 4) == all_words - language(a, 4)
    assert D.equivalent(D.complement(c), a)
    assert D.is_empty(D.product(a, c, "and"))


@settings(max_examples=40, deadline=None)
@given(automata())
def test_project_matches_existential_enumeration(a):
    a = D.extend(a, ("p", "q"))
    pr = D.project(a, "p")
    assert pr.vars == ("q",)

    def pred(w):
        opts = [(x, x | {"p"}) for x in w]
        return any(D.accepts(a, v) for v in itertools.product(*opts))

    assert language(pr, 4) == brute(("q",), 4, pred)


@settings(max_examples=40, deadline=None)
@given(automata(), automata())
def test_chop_matches_split_enumeration(a, b):
    a, b = D.extend(a, ("p", "q")), D.extend(b, ("p", "q"))
    c = D.chop(a, b)

    def pred(w):
        return any(D.accepts(a, w[: m + 1]) and D.accepts(b, w[m:]) for m in range(len(w)))

    assert language(c, 4) == brute(("p", "q"), 4, pred)


@settings(max_examples=60, deadline=None)
@given(automata(), automata())
def test_difference_witness_is_shortest(a, b):
    a, b = D.extend(a, ("p", "q")), D.extend(b, ("p", "q"))
    w = D.difference_witness(a, b)
    diff = language(a, 4) - language(b, 4)
    if w is None:
        assert not diff
        assert D.includes(b, a)
    else:
        assert D.accepts(a, w) and not D.accepts(b, w)
        if diff:
            assert len(w) == min(len(x) for x in diff)


@settings(max_examples=50, deadline=None)
@given(automata())
def test_dump_load_round_trip(a):
    b, extra = D.load(D.dump(a, ["kind test"]))
    assert extra["kind"] == ["test"]
    assert b.vars == a.vars and b.initial == a.initial
    assert np.array_equal(b.delta, a.delta) and np.array_equal(b.accepting, a.accepting)


@settings(max_examples=50, deadline=None)
@given(automata())
def test_cubes_partition_letters(a):
    for s in range(a.n_states):
        covered = np.zeros(a.n_letters, int)
        for cube, t in a.transitions(s):
            for letter in D.cube_letters(cube or ""):
                covered[letter] += 1
                assert a.delta[s, letter] == t
        assert (covered == 1).all()


def test_universal_and_empty():
    assert D.accepts(D.universal(["p"]), [{"p"}, set()])
    assert not D.accepts(D.empty(["p"]), [{"p"}])
    assert D.is_universal(D.universal([])) and D.is_empty(D.empty([]))


def test_point_automaton():
    a = compile_formula(parse_formula("<p>"), ["p"])
    assert D.accepts(a, [{"p"}])
    assert not D.accepts(a, [{"p"}, {"p"}])


def test_project_point():
    a = compile_formula(parse_formula("<p>"), ["p", "q"])
    pr = D.project(a, "p")
    assert language(pr, 3) == {(frozenset(),), (frozenset({"q"}),)}


def test_project_count_gives_all_words():
    a = compile_formula(parse_formula("scount p = 1"), ["p", "q"])
    assert D.is_universal(D.project(a, "p"))


def test_count_err_inclusion():
    env = ["A"]
    e1 = compile_formula(count_err("A", 1), env)
    e2 = compile_formula(count_err("A", 2), env)
    assert D.includes(e1, e2)
    assert not D.includes(e2, e1)


def test_alphabet_errors():
    a = D.universal(["p"])
    with pytest.raises(D.AlphabetMismatch):
        D.includes(a, D.universal(["q"]))
    with pytest.raises(D.AlphabetMismatch):
        D.accepts(a, [{"z"}])
    with pytest.raises(ValueError):
        D.accepts(a, [])
    with pytest.raises(ValueError):
        D.Dfa(["p"], np.array([[0, 3]]), [True], 0)


def test_subset_cap(monkeypatch):
    # "p held 5 steps ago" needs 2^5 subsets
    big = parse_formula("true ^ <p> ^ (slen = 5)")
    assert compile_formula(big, ["p"]).n_states >= 32
    monkeypatch.setattr(D, "SUBSET_CAP", 4)
    with pytest.raises(D.ResourceLimit):
        compile_formula(big, ["p"])


def test_dot_output():
    text = D.to_dot(compile_formula(parse_formula("<p>"), ["p"]))
    assert text.startswith("digraph") and "doublecircle" in text
