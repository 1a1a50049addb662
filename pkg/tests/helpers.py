"""Shared generators and brute-force oracles for the test suite."""
from __future__ import annotations

import itertools
import random

import numpy as np

from qdsynth import dfa as D
from qdsynth.compile import compile_formula
from qdsynth.formula import (
    All, AllButLast, AllQ, And, Box, Chop, Diamond, EP, Ex, Iff, Implies, KBounded, Not, Or,
    PAnd, PFalse, PIff, PImplies, PNot, POr, PTrue, Point, Pref, SCount, SDur, SLen, TrueF,
    Unit, Var,
)
from qdsynth.semantics import whole_word_table, word_index_letters

OPS = ("<", "<=", "=", ">=", ">")


def random_prop(rng: random.Random, vars, depth: int = 2):
    if depth == 0 or rng.random() < 0.4:
        r = rng.random()
        if r < 0.08:
            return PTrue()
        if r < 0.12:
            return PFalse()
        return Var(rng.choice(vars))
    kind = rng.randrange(5)
    if kind == 0:
        return PNot(random_prop(rng, vars, depth - 1))
    cls = (PAnd, POr, PImplies, PIff)[kind - 1]
    return cls(random_prop(rng, vars, depth - 1), random_prop(rng, vars, depth - 1))


def random_formula(rng: random.Random, vars, depth: int = 4):
    """Random formula of nesting depth at most ``depth``; quantifiers bind names from ``vars``."""
    if depth <= 1 or rng.random() < 0.25:
        kind = rng.randrange(9)
        p = random_prop(rng, vars, 1)
        c = rng.randrange(0, 4)
        return [
            lambda: Point(p), lambda: AllButLast(p), lambda: All(p), lambda: Unit(p),
            lambda: SLen(rng.choice(OPS), c), lambda: SCount(p, rng.choice(OPS), c),
            lambda: SDur(p, rng.choice(OPS), c), lambda: TrueF(), lambda: EP(p),
        ][kind]()
    sub = lambda: random_formula(rng, vars, depth - 1)  # noqa: E731
    kind = rng.randrange(13)
    if kind == 0:
        return Not(sub())
    if kind in (1, 2):
        return Chop(sub(), sub())
    if kind == 3:
        return And(sub(), sub())
    if kind == 4:
        return Or(sub(), sub())
    if kind == 5:
        return Ex(rng.choice(vars), sub())
    if kind == 6:
        return AllQ(rng.choice(vars), sub())
    if kind == 7:
        return Implies(sub(), sub())
    if kind == 8:
        return Iff(sub(), sub())
    if kind == 9:
        return Diamond(sub())
    if kind == 10:
        return Box(sub())
    if kind == 11:
        return Pref(sub())
    return KBounded(sub(), rng.randrange(1, 4))


def oracle_mismatches(f, env, max_len: int):
    """Words up to ``max_len`` on which the compiled automaton and the oracle disagree."""
    a = compile_formula(f, env)
    bad = []
    for n in range(1, max_len + 1):
        want = whole_word_table(f, env, n)
        got = D.accepts_batch(a, word_index_letters(len(env), n))
        for w in np.flatnonzero(want != got)[:3].tolist():
            bad.append((n, w))
    return bad


# ---------------------------------------------------------------------------
# synthesis oracles


def expectimax(sup_dfa, soft, n_in, n_out, state, soft_state, steps, gamma):
    """Best expected discounted soft reward over ``steps`` moves, by recursion over all inputs."""
    if steps == 0:
        return 0.0
    total = 0.0
    for i in range(n_in):
        total += max(
            q for q in (
                _q(sup_dfa, soft, n_in, n_out, state, soft_state, i, o, steps, gamma)
                for o in range(n_out)
            ) if q is not None
        )
    return total / n_in


def _q(sup_dfa, soft, n_in, n_out, state, soft_state, i, o, steps, gamma):
    letter = i | (o * n_in)
    t = int(sup_dfa.delta[state, letter])
    if not sup_dfa.accepting[t]:
        return None
    ts = int(soft.delta[soft_state, letter])
    r = float(soft.accepting[ts])
    return r + gamma * expectimax(sup_dfa, soft, n_in, n_out, t, ts, steps - 1, gamma)


def expectimax_argmax(sup_dfa, soft, n_in, n_out, state, soft_state, i, horizon, gamma, tol=1e-9):
    qs = {o: _q(sup_dfa, soft, n_in, n_out, state, soft_state, i, o, horizon, gamma) for o in range(n_out)}
    qs = {o: q for o, q in qs.items() if q is not None}
    best = max(qs.values())
    return {o for o, q in qs.items() if q >= best - tol}


def reachable_pairs(sup_dfa, soft):
    """Reachable (supervisor state, soft state) pairs, moving only along allowed letters."""
    start = (sup_dfa.initial, soft.initial)
    seen = {start}
    stack = [start]
    while stack:
        s, q = stack.pop()
        for letter in range(sup_dfa.n_letters):
            t = int(sup_dfa.delta[s, letter])
            if not sup_dfa.accepting[t]:
                continue
            nxt = (t, int(soft.delta[q, letter]))
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return sorted(seen)


def input_words(n_inputs: int, max_len: int):
    for n in range(1, max_len + 1):
        yield from itertools.product(range(1 << n_inputs), repeat=n)


def brute_must(sup, commit, n_in: int, n_out: int, word) -> bool:
    """Every allowed output sequence for the input word satisfies ``commit`` (explicit enumeration)."""
    c = D.extend(commit, sup.io.vars)
    frontier = {(sup.dfa.initial, c.initial)}
    for i in word:
        nxt = set()
        for s, q in frontier:
            for o in range(n_out):
                letter = i | (o * n_in)
                t = int(sup.dfa.delta[s, letter])
                if sup.dfa.accepting[t]:
                    nxt.add((t, int(c.delta[q, letter])))
        frontier = nxt
    return all(c.accepting[q] for _, q in frontier)
