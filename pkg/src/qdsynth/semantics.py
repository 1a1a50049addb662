"""Direct implementation of the QDDC satisfaction relation.

This module is the testing oracle. It never looks at automata: ``eval`` follows
the recursive clauses word by word, and ``truth_tables`` evaluates the same
clauses for every word of a fixed length at once using boolean arrays.
"""
from __future__ import annotations

import itertools

import numpy as np

from .formula import (
    All, AllButLast, AllQ, And, Chop, Ex, Not, Or, PAnd, PFalse, PIff, PImplies, PNot,
    POr, PTrue, Point, SCount, SDur, SLen, TrueF, Unit, Var, desugar,
)

Word = tuple  # tuple of frozensets of variable names


def compare(x: int, op: str, c: int) -> bool:
    if op == "<":
        return x < c
    if op == "<=":
        return x <= c
    if op == "=":
        return x == c
    if op == ">=":
        return x >= c
    if op == ">":
        return x > c
    raise ValueError(f"unknown comparison {op!r}")


def make_word(letters) -> Word:
    return tuple(frozenset(a) for a in letters)


def eval_prop(w: Word, i: int, phi) -> bool:
    if not 0 <= i < len(w):
        raise IndexError(f"position {i} outside word of length {len(w)}")
    return _prop(w[i], phi)


def _prop(letter, phi) -> bool:
    if isinstance(phi, PTrue):
        return True
    if isinstance(phi, PFalse):
        return False
    if isinstance(phi, Var):
        return phi.name in letter
    if isinstance(phi, PNot):
        return not _prop(letter, phi.arg)
    if isinstance(phi, PAnd):
        return _prop(letter, phi.left) and _prop(letter, phi.right)
    if isinstance(phi, POr):
        return _prop(letter, phi.left) or _prop(letter, phi.right)
    if isinstance(phi, PImplies):
        return (not _prop(letter, phi.left)) or _prop(letter, phi.right)
    if isinstance(phi, PIff):
        return _prop(letter, phi.left) == _prop(letter, phi.right)
    raise TypeError(f"not a propositional formula: {phi!r}")


def eval(w: Word, b: int, e: int, d) -> bool:  # noqa: A001 - mirrors the relation's name
    """``w, [b, e] |= d``."""
    if not 0 <= b <= e < len(w):
        raise IndexError(f"interval [{b},{e}] outside word of length {len(w)}")
    return _eval(make_word(w), b, e, desugar(d))


def _eval(w, b, e, d) -> bool:
    if isinstance(d, TrueF):
        return True
    if isinstance(d, Point):
        return b == e and _prop(w[b], d.prop)
    if isinstance(d, AllButLast):
        return b < e and all(_prop(w[i], d.prop) for i in range(b, e))
    if isinstance(d, All):
        return all(_prop(w[i], d.prop) for i in range(b, e + 1))
    if isinstance(d, Unit):
        return e == b + 1 and _prop(w[b], d.prop)
    if isinstance(d, Chop):
        return any(_eval(w, b, i, d.left) and _eval(w, i, e, d.right) for i in range(b, e + 1))
    if isinstance(d, Not):
        return not _eval(w, b, e, d.arg)
    if isinstance(d, And):
        return _eval(w, b, e, d.left) and _eval(w, b, e, d.right)
    if isinstance(d, Or):
        return _eval(w, b, e, d.left) or _eval(w, b, e, d.right)
    if isinstance(d, (Ex, AllQ)):
        # p-variants range over the whole word, not just [b, e]
        want = isinstance(d, Ex)
        for bits in itertools.product((False, True), repeat=len(w)):
            variant = tuple((a | {d.var}) if bit else (a - {d.var}) for a, bit in zip(w, bits))
            if _eval(variant, b, e, d.body) == want:
                return want
        return not want
    if isinstance(d, SLen):
        return compare(e - b, d.op, d.c)
    if isinstance(d, SCount):
        return compare(sum(_prop(w[i], d.prop) for i in range(b, e + 1)), d.op, d.c)
    if isinstance(d, SDur):
        return compare(sum(_prop(w[i], d.prop) for i in range(b, e)), d.op, d.c)
    raise TypeError(f"not a core formula: {d!r}")


def whole_word(w: Word, d) -> bool:
    return eval(w, 0, len(w) - 1, d)


def point_sat(w: Word, i: int, d) -> bool:
    return eval(w, 0, i, d)


def enumerate_words(env, max_len: int):
    """Every nonempty word over ``env`` up to ``max_len``, in length-lexicographic order."""
    env = list(env)
    letters = [frozenset(v for j, v in enumerate(env) if m >> j & 1) for m in range(2 ** len(env))]
    for n in range(1, max_len + 1):
        for combo in itertools.product(letters, repeat=n):
            yield combo


# ---------------------------------------------------------------------------
# batch evaluation over all words of one length


def word_index_letters(env_size: int, n: int) -> np.ndarray:
    """Letters of every word of length n: array (2**(k*n), n) of letter codes.

    Word index bit ``i*k + j`` is variable j at position i; a letter code has
    bit j for variable j.
    """
    k = env_size
    idx = np.arange(2 ** (k * n), dtype=np.int64)
    return np.stack([(idx >> (i * k)) & ((1 << k) - 1) for i in range(n)], axis=1)


def truth_tables(d, env, n: int) -> np.ndarray:
    """Bool array ``T[b, e, w]`` of ``w, [b, e] |= d`` for all words w of length n.

    Quantified variables must be members of ``env`` (shadowing is allowed);
    this keeps the word space at 2**(len(env)*n).
    """
    env = list(env)
    k = len(env)
    if k * n > 26:
        raise ValueError("word space too large for batch evaluation")
    idx = np.arange(2 ** (k * n), dtype=np.int64)
    bits = {
        (i, v): ((idx >> (i * k + j)) & 1).astype(bool) for i in range(n) for j, v in enumerate(env)
    }
    b_idx, e_idx = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    valid = (b_idx <= e_idx)[:, :, None]
    return _tables(desugar(d), env, n, bits, valid)


def _prop_rows(phi, env, n, bits):
    size = next(iter(bits.values())).shape[0]

    def go(p, i):
        if isinstance(p, PTrue):
            return np.ones(size, bool)
        if isinstance(p, PFalse):
            return np.zeros(size, bool)
        if isinstance(p, Var):
            if (i, p.name) not in bits:
                raise ValueError(f"variable {p.name!r} not in environment")
            return bits[(i, p.name)]
        if isinstance(p, PNot):
            return ~go(p.arg, i)
        if isinstance(p, PAnd):
            return go(p.left, i) & go(p.right, i)
        if isinstance(p, POr):
            return go(p.left, i) | go(p.right, i)
        if isinstance(p, PImplies):
            return ~go(p.left, i) | go(p.right, i)
        if isinstance(p, PIff):
            return go(p.left, i) == go(p.right, i)
        raise TypeError(p)

    return np.stack([go(phi, i) for i in range(n)])


def _tables(d, env, n, bits, valid):
    size = next(iter(bits.values())).shape[0]
    shape = (n, n, size)
    if isinstance(d, TrueF):
        return np.broadcast_to(valid, shape).copy()
    if isinstance(d, (Point, AllButLast, All, Unit, SCount, SDur)):
        rows = _prop_rows(d.prop, env, n, bits)
    out = np.zeros(shape, bool)
    if isinstance(d, Point):
        for b in range(n):
            out[b, b] = rows[b]
        return out
    if isinstance(d, AllButLast):
        for b in range(n):
            acc = np.ones(size, bool)
            for e in range(b + 1, n):
                acc = acc & rows[e - 1]
                out[b, e] = acc
        return out
    if isinstance(d, All):
        for b in range(n):
            acc = np.ones(size, bool)
            for e in range(b, n):
                acc = acc & rows[e]
                out[b, e] = acc
        return out
    if isinstance(d, Unit):
        for b in range(n - 1):
            out[b, b + 1] = rows[b]
        return out
    if isinstance(d, (SCount, SDur)):
        last = 1 if isinstance(d, SCount) else 0
        for b in range(n):
            cnt = np.zeros(size, np.int64)
            for e in range(b, n):
                total = cnt + rows[e] if last else cnt
                out[b, e] = _cmp_array(total, d.op, d.c)
                cnt = cnt + rows[e]
        return out
    if isinstance(d, SLen):
        for b in range(n):
            for e in range(b, n):
                out[b, e] = compare(e - b, d.op, d.c)
        return out
    if isinstance(d, Chop):
        left = _tables(d.left, env, n, bits, valid)
        right = _tables(d.right, env, n, bits, valid)
        for b in range(n):
            for e in range(b, n):
                acc = np.zeros(size, bool)
                for i in range(b, e + 1):
                    acc |= left[b, i] & right[i, e]
                out[b, e] = acc
        return out
    if isinstance(d, Not):
        return ~_tables(d.arg, env, n, bits, valid) & valid
    if isinstance(d, And):
        return _tables(d.left, env, n, bits, valid) & _tables(d.right, env, n, bits, valid)
    if isinstance(d, Or):
        return _tables(d.left, env, n, bits, valid) | _tables(d.right, env, n, bits, valid)
    if isinstance(d, (Ex, AllQ)):
        if d.var not in env:
            raise ValueError(f"quantified variable {d.var!r} must be in the environment")
        body = _tables(d.body, env, n, bits, valid)
        k = len(env)
        j = env.index(d.var)
        nbits = k * n
        t = body.reshape((n, n) + (2,) * nbits)
        # bit t of the word index sits on axis 2 + (nbits - 1 - t)
        axes = tuple(2 + (nbits - 1 - (i * k + j)) for i in range(n))
        red = t.any(axis=axes, keepdims=True) if isinstance(d, Ex) else t.all(axis=axes, keepdims=True)
        return np.broadcast_to(red, t.shape).reshape(shape) & valid
    raise TypeError(f"not a core formula: {d!r}")


def _cmp_array(x, op, c):
    if op == "<":
        return x < c
    if op == "<=":
        return x <= c
    if op == "=":
        return x == c
    if op == ">=":
        return x >= c
    if op == ">":
        return x > c
    raise ValueError(op)


def whole_word_table(d, env, n: int) -> np.ndarray:
    """Acceptance of every word of length n (index encoding as in ``truth_tables``)."""
    return truth_tables(d, env, n)[0, n - 1].copy()
