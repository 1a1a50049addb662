"""Formula-to-automaton compilation.

Each subformula is compiled over its own support (the variables it actually
mentions), which keeps chop and projection subset constructions small; the
alphabets are widened only when two automata are combined.
"""
from __future__ import annotations

import numpy as np

from . import dfa as D
from .formula import (
    All, AllButLast, AllQ, And, Chop, Ex, Not, Or, PAnd, PFalse, PIff, PImplies, PNot, POr,
    PTrue, Point, SCount, SDur, SLen, TrueF, Unit, Var, desugar, free_vars, prop_vars,
)
from .semantics import compare


class UnknownVariable(ValueError):
    pass


def prop_table(phi, vars) -> np.ndarray:
    """Truth value of a propositional formula on every letter over ``vars``."""
    vars = list(vars)
    idx = np.arange(1 << len(vars), dtype=np.int64)

    def go(p):
        if isinstance(p, PTrue):
            return np.ones(len(idx), bool)
        if isinstance(p, PFalse):
            return np.zeros(len(idx), bool)
        if isinstance(p, Var):
            return ((idx >> vars.index(p.name)) & 1).astype(bool)
        if isinstance(p, PNot):
            return ~go(p.arg)
        if isinstance(p, PAnd):
            return go(p.left) & go(p.right)
        if isinstance(p, POr):
            return go(p.left) | go(p.right)
        if isinstance(p, PImplies):
            return ~go(p.left) | go(p.right)
        if isinstance(p, PIff):
            return go(p.left) == go(p.right)
        raise TypeError(f"not a propositional formula: {p!r}")

    return go(phi)


def _table(rows, acc, vars) -> D.Dfa:
    return D.minimize(D.Dfa(vars, np.array(rows, dtype=np.int64), acc, 0))


def _point(phi, vars):
    t = prop_table(phi, vars)
    L = len(t)
    # 0 initial, 1 accept, 2 sink
    return _table([np.where(t, 1, 2), [2] * L, [2] * L], [False, True, False], vars)


def _all_but_last(phi, vars):
    t = prop_table(phi, vars)
    L = len(t)
    # 0 initial, 1 one good letter, 2 all good (len>=2), 3 last letter bad, 4 sink
    nxt = np.where(t, 2, 3)
    rows = [np.where(t, 1, 4), nxt, nxt, [4] * L, [4] * L]
    return _table(rows, [False, False, True, True, False], vars)


def _all(phi, vars):
    t = prop_table(phi, vars)
    L = len(t)
    good = np.where(t, 1, 2)
    return _table([good, good, [2] * L], [False, True, False], vars)


def _unit(phi, vars):
    t = prop_table(phi, vars)
    L = len(t)
    # 0 initial, 1 first letter good, 2 accept, 3 sink
    return _table([np.where(t, 1, 3), [2] * L, [3] * L, [3] * L], [False, False, True, False], vars)


def _slen(op, c):
    top = c + 1
    # state 0 initial; state x+1 holds e-b = x, saturating at top
    rows = [[1]] + [[min(x + 1, top) + 1] for x in range(top + 1)]
    acc = [False] + [compare(x, op, c) for x in range(top + 1)]
    return _table(rows, acc, ())


def _scount(phi, op, c, vars):
    t = prop_table(phi, vars).astype(np.int64)
    top = c + 1
    rows = [t + 1] + [np.minimum(x + t, top) + 1 for x in range(top + 1)]
    acc = [False] + [compare(x, op, c) for x in range(top + 1)]
    return _table(rows, acc, vars)


def _sdur(phi, op, c, vars):
    t = prop_table(phi, vars).astype(np.int64)
    top = c + 1
    # state 1 + 2*x + last: x counts phi-letters before the last one
    sid = lambda x, last: 1 + 2 * x + last  # noqa: E731
    rows = [sid(0, t)]
    acc = [False]
    for x in range(top + 1):
        for last in (0, 1):
            rows.append(sid(min(x + last, top), t))
            acc.append(compare(x, op, c))
    return _table(rows, acc, vars)


class Compiler:
    """Compiles core formulas; memoizes per instance."""

    def __init__(self, env):
        self.env = tuple(env)
        self.order = {v: i for i, v in enumerate(self.env)}
        self.memo: dict = {}

    def _sorted(self, names) -> tuple:
        for v in sorted(names):
            if v not in self.order:
                self.order[v] = len(self.order)
        return tuple(sorted(names, key=self.order.__getitem__))

    def _widen(self, a: D.Dfa, b: D.Dfa):
        vars = self._sorted(set(a.vars) | set(b.vars))
        return D.extend(a, vars), D.extend(b, vars)

    def compile(self, d) -> D.Dfa:
        """Minimal automaton for a core formula over its own support."""
        hit = self.memo.get(d)
        if hit is not None:
            return hit
        out = self._compile(d)
        self.memo[d] = out
        return out

    def _compile(self, d) -> D.Dfa:
        if isinstance(d, TrueF):
            return D.universal(())
        if isinstance(d, (Point, AllButLast, All, Unit)):
            vars = self._sorted(prop_vars(d.prop))
            build = {Point: _point, AllButLast: _all_but_last, All: _all, Unit: _unit}[type(d)]
            return build(d.prop, vars)
        if isinstance(d, SLen):
            return _slen(d.op, d.c)
        if isinstance(d, SCount):
            return _scount(d.prop, d.op, d.c, self._sorted(prop_vars(d.prop)))
        if isinstance(d, SDur):
            return _sdur(d.prop, d.op, d.c, self._sorted(prop_vars(d.prop)))
        if isinstance(d, Not):
            return D.complement(self.compile(d.arg))
        if isinstance(d, (And, Or)):
            a, b = self._widen(self.compile(d.left), self.compile(d.right))
            return D.product(a, b, "and" if isinstance(d, And) else "or")
        if isinstance(d, Chop):
            a, b = self._widen(self.compile(d.left), self.compile(d.right))
            return D.chop(a, b)
        if isinstance(d, Ex):
            inner = self.compile(d.body)
            return D.project(inner, d.var) if d.var in inner.vars else inner
        if isinstance(d, AllQ):
            inner = self.compile(d.body)
            if d.var not in inner.vars:
                return inner
            return D.complement(D.project(D.complement(inner), d.var))
        raise TypeError(f"not a core formula: {d!r}")


def compile_formula(d, env, compiler: Compiler | None = None) -> D.Dfa:
    """Minimal automaton over exactly ``env`` accepting the words that satisfy ``d``."""
    env = tuple(env)
    unknown = free_vars(d) - set(env)
    if unknown:
        raise UnknownVariable(f"free variable(s) not in environment: {', '.join(sorted(unknown))}")
    c = compiler if compiler is not None else Compiler(env)
    a = c.compile(desugar(d))
    return D.renumber(D.extend(a, env))


compile = compile_formula  # noqa: A001


def validity(d, env) -> bool:
    return D.is_universal(compile_formula(d, env))
