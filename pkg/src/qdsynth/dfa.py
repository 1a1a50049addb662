"""Explicit-state automata over valuations of an ordered variable list.

A letter is an integer whose bit j is the value of ``vars[j]``. Transitions are
stored as a dense table ``delta[state, letter]``; cube lists are derived from
it for dumps and DOT output. Languages contain nonempty words only, so the
acceptance flag of the initial state matters only when it is re-entered.
"""
from __future__ import annotations

from collections import deque

import numpy as np

SUBSET_CAP = 1 << 20
_DENSE_PAIR_LIMIT = 1 << 24


class ResourceLimit(RuntimeError):
    pass


class AlphabetMismatch(ValueError):
    pass


class Dfa:
    __slots__ = ("vars", "delta", "accepting", "initial")

    def __init__(self, vars, delta, accepting, initial: int = 0):
        self.vars = tuple(vars)
        if len(set(self.vars)) != len(self.vars):
            raise ValueError(f"duplicate variables in {self.vars}")
        self.delta = np.ascontiguousarray(delta, dtype=np.int32)
        self.accepting = np.ascontiguousarray(accepting, dtype=bool)
        self.initial = int(initial)
        n = self.delta.shape[0]
        if self.delta.ndim != 2 or self.delta.shape[1] != 1 << len(self.vars):
            raise ValueError("transition table must have one column per letter")
        if self.accepting.shape != (n,):
            raise ValueError("acceptance vector must have one entry per state")
        if n and (self.delta.min() < 0 or self.delta.max() >= n):
            raise ValueError("transition target out of range")
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        self.delta.flags.writeable = False
        self.accepting.flags.writeable = False

    @property
    def n_states(self) -> int:
        return self.delta.shape[0]

    @property
    def n_letters(self) -> int:
        return self.delta.shape[1]

    def transitions(self, state: int) -> list[tuple[str, int]]:
        """Disjoint cubes (over ``vars`` in order) covering every letter, with targets."""
        return state_cubes(self.delta[state], len(self.vars))

    def __repr__(self):
        return f"Dfa(vars={list(self.vars)}, states={self.n_states}, accepting={int(self.accepting.sum())})"


# ---------------------------------------------------------------------------
# letters and words


def letter_code(vars, valuation) -> int:
    if isinstance(valuation, (int, np.integer)):
        return int(valuation)
    vars = list(vars)
    unknown = set(valuation) - set(vars)
    if unknown:
        raise AlphabetMismatch(f"letter mentions unknown variable(s) {sorted(unknown)}")
    return sum(1 << vars.index(v) for v in valuation)


def letter_set(vars, code: int) -> frozenset:
    return frozenset(v for j, v in enumerate(vars) if code >> j & 1)


def encode_word(vars, word) -> list[int]:
    return [letter_code(vars, a) for a in word]


def decode_word(vars, codes) -> tuple:
    return tuple(letter_set(vars, int(c)) for c in codes)


def letter_map(src_vars, dst_vars) -> np.ndarray:
    """For each letter over ``dst_vars``, the letter over ``src_vars`` it restricts to."""
    dst = list(dst_vars)
    missing = [v for v in src_vars if v not in dst]
    if missing:
        raise AlphabetMismatch(f"variables {missing} not in target alphabet")
    idx = np.arange(1 << len(dst), dtype=np.int64)
    out = np.zeros_like(idx)
    for j, v in enumerate(src_vars):
        out |= ((idx >> dst.index(v)) & 1) << j
    return out


def extend(a: Dfa, vars) -> Dfa:
    """Same language over a larger (or reordered) alphabet; new variables are ignored."""
    vars = tuple(vars)
    if vars == a.vars:
        return a
    return Dfa(vars, a.delta[:, letter_map(a.vars, vars)], a.accepting, a.initial)


def _union_vars(*vs) -> tuple:
    out = []
    for v in vs:
        for x in v:
            if x not in out:
                out.append(x)
    return tuple(out)


# ---------------------------------------------------------------------------
# running


def accepts(a: Dfa, word) -> bool:
    codes = encode_word(a.vars, word)
    if not codes:
        raise ValueError("words are nonempty")
    s = a.initial
    for c in codes:
        if not 0 <= c < a.n_letters:
            raise AlphabetMismatch(f"letter {c} outside alphabet")
        s = a.delta[s, c]
    return bool(a.accepting[s])


def run_batch(a: Dfa, letters: np.ndarray) -> np.ndarray:
    """Final states for a batch of equal-length words given as an (N, n) letter array."""
    letters = np.asarray(letters)
    state = np.full(letters.shape[0], a.initial, dtype=np.int64)
    for i in range(letters.shape[1]):
        state = a.delta[state, letters[:, i]]
    return state


def accepts_batch(a: Dfa, letters: np.ndarray) -> np.ndarray:
    return a.accepting[run_batch(a, letters)]


# ---------------------------------------------------------------------------
# elementary automata


def universal(vars) -> Dfa:
    """All nonempty words."""
    L = 1 << len(vars)
    return Dfa(vars, np.array([[1] * L, [1] * L]), [False, True], 0)


def empty(vars) -> Dfa:
    L = 1 << len(vars)
    return Dfa(vars, np.zeros((1, L), dtype=np.int32), [False], 0)


# ---------------------------------------------------------------------------
# reachability, renumbering, minimization


def _bfs_order(delta: np.ndarray, init: int) -> np.ndarray:
    """States reachable from init, in BFS order with successors taken letter by letter."""
    n = delta.shape[0]
    seen = np.zeros(n, bool)
    seen[init] = True
    order = [init]
    head = 0
    while head < len(order):
        s = order[head]
        head += 1
        row = delta[s]
        u, first = np.unique(row, return_index=True)
        for t in u[np.argsort(first)].tolist():
            if not seen[t]:
                seen[t] = True
                order.append(t)
    return np.array(order, dtype=np.int64)


def renumber(a: Dfa) -> Dfa:
    """Drop unreachable states and number the rest in BFS order from the initial state."""
    order = _bfs_order(a.delta, a.initial)
    new = np.full(a.n_states, -1, dtype=np.int64)
    new[order] = np.arange(len(order))
    return Dfa(a.vars, new[a.delta[order]], a.accepting[order], 0)


def _fix_initial(a: Dfa) -> Dfa:
    """Give the automaton a non-accepting initial state without changing its language."""
    if not a.accepting[a.initial]:
        return a
    n = a.n_states
    delta = np.vstack([a.delta, a.delta[a.initial][None, :]])
    acc = np.append(a.accepting, False)
    return Dfa(a.vars, delta, acc, n)


def _row_classes(m: np.ndarray) -> np.ndarray:
    m = np.ascontiguousarray(m)
    v = m.view(np.dtype((np.void, m.dtype.itemsize * m.shape[1]))).ravel()
    _, inv = np.unique(v, return_inverse=True)
    return inv.ravel()


def minimize(a: Dfa) -> Dfa:
    """Canonical minimal automaton (Moore partition refinement, BFS numbering)."""
    a = renumber(_fix_initial(a))
    delta = a.delta
    cls = _row_classes(a.accepting[:, None].astype(np.int32)).astype(np.int32)
    count = int(cls.max()) + 1
    while True:
        sig = np.concatenate([cls[:, None], cls[delta]], axis=1)
        new = _row_classes(sig).astype(np.int32)
        k = int(new.max()) + 1
        if k == count:
            break
        cls, count = new, k
    rep = np.zeros(count, dtype=np.int64)
    rep[cls[::-1]] = np.arange(a.n_states)[::-1]
    q = Dfa(a.vars, cls[delta[rep]], a.accepting[rep], int(cls[a.initial]))
    return renumber(q)


# ---------------------------------------------------------------------------
# boolean operations


_COMBINERS = {
    "and": lambda x, y: x & y,
    "or": lambda x, y: x | y,
    "diff": lambda x, y: x & ~y,
    "xor": lambda x, y: x ^ y,
}


def _product_states(da, db, init_a, init_b, allowed=None):
    """Reachable pairs of two automata over the same letters.

    Returns (pairs, delta) where ``pairs`` is an (n, 2) array of component
    states and ``delta`` the product transition table. ``allowed`` optionally
    masks letters per first-component state; masked transitions go to pair
    index -1 (the caller decides what they mean).
    """
    na, nb = da.shape[0], db.shape[0]
    L = da.shape[1]
    dense = na * nb <= _DENSE_PAIR_LIMIT
    if dense:
        ids = np.full(na * nb, -1, dtype=np.int64)
    else:
        ids_map: dict[int, int] = {}
    code0 = init_a * nb + init_b
    codes = [np.array([code0], dtype=np.int64)]
    if dense:
        ids[code0] = 0
    else:
        ids_map[code0] = 0
    count = 1
    rows = []
    frontier = codes[0]
    while len(frontier):
        pa, pb = frontier // nb, frontier % nb
        succ = da[pa].astype(np.int64) * nb + db[pb]
        if allowed is not None:
            succ = np.where(allowed[pa], succ, -1)
        rows.append(succ)
        cand = np.unique(succ[succ >= 0])
        if dense:
            fresh = cand[ids[cand] < 0]
            ids[fresh] = np.arange(count, count + len(fresh))
        else:
            fresh = np.array([c for c in cand.tolist() if c not in ids_map], dtype=np.int64)
            for c in fresh.tolist():
                ids_map[c] = len(ids_map)
        count += len(fresh)
        if count > SUBSET_CAP * 4:
            raise ResourceLimit(f"product exceeds {SUBSET_CAP * 4} states")
        codes.append(fresh)
        frontier = fresh
    allcodes = np.concatenate(codes)
    succ = np.concatenate(rows) if rows else np.zeros((0, L), dtype=np.int64)
    if dense:
        delta = np.where(succ >= 0, ids[np.maximum(succ, 0)], -1)
    else:
        keys = np.array(sorted(ids_map), dtype=np.int64)
        vals = np.array([ids_map[k] for k in keys.tolist()], dtype=np.int64)
        pos = np.searchsorted(keys, np.maximum(succ, 0))
        delta = np.where(succ >= 0, vals[np.minimum(pos, len(keys) - 1)], -1)
    pairs = np.stack([allcodes // nb, allcodes % nb], axis=1)
    return pairs, delta


def align(a: Dfa, b: Dfa) -> tuple[Dfa, Dfa]:
    vars = _union_vars(a.vars, b.vars)
    return extend(a, vars), extend(b, vars)


def product(a: Dfa, b: Dfa, combiner: str = "and", *, strict: bool = True, minimal: bool = True) -> Dfa:
    """Synchronous product; ``combiner`` is one of and, or, diff, xor.

    With ``strict`` the two automata must share the same variable set (the
    order may differ); otherwise alphabets are unioned.
    """
    if strict and set(a.vars) != set(b.vars):
        raise AlphabetMismatch(f"alphabets differ: {a.vars} vs {b.vars}")
    a, b = align(a, b)
    comb = _COMBINERS[combiner]
    pairs, delta = _product_states(a.delta, b.delta, a.initial, b.initial)
    acc = comb(a.accepting[pairs[:, 0]], b.accepting[pairs[:, 1]])
    out = Dfa(a.vars, delta, acc, 0)
    return minimize(out) if minimal else out


def complement(a: Dfa) -> Dfa:
    """Complement relative to nonempty words."""
    return minimize(Dfa(a.vars, a.delta, ~a.accepting, a.initial))


# ---------------------------------------------------------------------------
# subset construction


def determinize(vars, tables: np.ndarray, accepting: np.ndarray, initial_states) -> Dfa:
    """Subset construction for an automaton given as m transition tables.

    ``tables`` has shape (m, n, L); entry -1 means "no transition". The
    successors of state q on letter a are {tables[k, q, a] for all k}.
    """
    tables = np.asarray(tables, dtype=np.int64)
    m, n, L = tables.shape
    accepting = np.asarray(accepting, dtype=bool)
    nbytes = (n + 7) // 8

    def key_of(members: np.ndarray) -> bytes:
        mask = np.zeros(n, bool)
        mask[members] = True
        return np.packbits(mask).tobytes()

    init = np.unique(np.asarray(list(initial_states), dtype=np.int64))
    index = {key_of(init): 0}
    members = [init]
    rows = []
    head = 0
    letters = np.arange(L)
    while head < len(members):
        cur = members[head]
        head += 1
        mat = np.zeros((L, n), bool)
        if len(cur):
            succ = tables[:, cur, :].reshape(-1, L)
            ok = succ >= 0
            li = np.broadcast_to(letters, succ.shape)[ok]
            mat[li, succ[ok]] = True
        packed = np.packbits(mat, axis=1)
        uniq, inv = np.unique(packed.view(np.dtype((np.void, nbytes))).ravel(), return_inverse=True)
        inv = inv.ravel()
        targets = np.empty(len(uniq), dtype=np.int64)
        first = np.zeros(len(uniq), dtype=np.int64)
        first[inv[::-1]] = np.arange(L)[::-1]
        for u in range(len(uniq)):
            key = uniq[u].tobytes()
            t = index.get(key)
            if t is None:
                t = len(members)
                if t >= SUBSET_CAP:
                    raise ResourceLimit(f"subset construction exceeds {SUBSET_CAP} states")
                index[key] = t
                members.append(np.flatnonzero(mat[first[u]]))
            targets[u] = t
        rows.append(targets[inv])
    acc = np.array([bool(accepting[s].any()) for s in members])
    return Dfa(vars, np.array(rows), acc, 0)


def project(a: Dfa, remove) -> Dfa:
    """Existential projection of one or more variables."""
    if isinstance(remove, str):
        remove = [remove]
    remove = list(dict.fromkeys(remove))
    unknown = [v for v in remove if v not in a.vars]
    if unknown:
        raise AlphabetMismatch(f"cannot project unknown variable(s) {unknown}")
    keep = [v for v in a.vars if v not in remove]
    pos_keep = [a.vars.index(v) for v in keep]
    pos_rem = [a.vars.index(v) for v in remove]
    resid = np.arange(1 << len(keep), dtype=np.int64)
    base = np.zeros_like(resid)
    for j, p in enumerate(pos_keep):
        base |= ((resid >> j) & 1) << p
    tables = []
    for r in range(1 << len(remove)):
        full = base.copy()
        for j, p in enumerate(pos_rem):
            if r >> j & 1:
                full |= 1 << p
        tables.append(a.delta[:, full])
    return minimize(determinize(keep, np.stack(tables), a.accepting, [a.initial]))


def chop(a: Dfa, b: Dfa) -> Dfa:
    """Words splittable at a shared letter into a word of ``a`` and a word of ``b``."""
    a, b = align(a, b)
    n1, n2 = a.n_states, b.n_states
    L = a.n_letters
    t0 = np.vstack([a.delta.astype(np.int64), b.delta.astype(np.int64) + n1])
    jump = np.where(a.accepting[a.delta], b.delta[b.initial][None, :].astype(np.int64) + n1, -1)
    t1 = np.vstack([jump, np.full((n2, L), -1, dtype=np.int64)])
    acc = np.concatenate([np.zeros(n1, bool), b.accepting])
    return minimize(determinize(a.vars, np.stack([t0, t1]), acc, [a.initial]))


# ---------------------------------------------------------------------------
# language queries


def _after_first(a: Dfa) -> np.ndarray:
    """States reachable by at least one letter."""
    n = a.n_states
    seen = np.zeros(n, bool)
    frontier = np.unique(a.delta[a.initial])
    seen[frontier] = True
    while len(frontier):
        nxt = np.unique(a.delta[frontier])
        nxt = nxt[~seen[nxt]]
        seen[nxt] = True
        frontier = nxt
    return seen


def is_empty(a: Dfa) -> bool:
    return not bool((a.accepting & _after_first(a)).any())


def is_universal(a: Dfa) -> bool:
    return bool(a.accepting[_after_first(a)].all())


def shortest_word(a: Dfa):
    """Shortest accepted word as a tuple of letter sets, or None if the language is empty."""
    n = a.n_states
    parent = np.full(n, -1, dtype=np.int64)
    via = np.full(n, -1, dtype=np.int64)
    # layer 1
    queue = deque()
    first = a.delta[a.initial]
    depth1 = {}
    for letter in range(a.n_letters):
        t = int(first[letter])
        if t not in depth1:
            depth1[t] = letter
    for t, letter in depth1.items():
        if a.accepting[t]:
            return decode_word(a.vars, [letter])
    seen = np.zeros(n, bool)
    for t, letter in depth1.items():
        seen[t] = True
        via[t] = letter
        parent[t] = -2  # reached from the initial state
        queue.append(t)
    while queue:
        s = queue.popleft()
        row = a.delta[s]
        u, firsts = np.unique(row, return_index=True)
        for t, letter in sorted(zip(u.tolist(), firsts.tolist()), key=lambda x: x[1]):
            if seen[t]:
                continue
            seen[t] = True
            parent[t] = s
            via[t] = letter
            if a.accepting[t]:
                word = []
                x = t
                while x != -2:
                    word.append(int(via[x]))
                    x = int(parent[x])
                return decode_word(a.vars, word[::-1])
            queue.append(t)
    return None


def difference_witness(a: Dfa, b: Dfa):
    """Shortest word in L(a) minus L(b), or None."""
    return shortest_word(product(a, b, "diff", strict=False, minimal=False))


def includes(a: Dfa, b: Dfa) -> bool:
    """True iff L(b) is a subset of L(a)."""
    if set(a.vars) != set(b.vars):
        raise AlphabetMismatch(f"alphabets differ: {a.vars} vs {b.vars}")
    return is_empty(product(b, a, "diff", minimal=False))


def equivalent(a: Dfa, b: Dfa) -> bool:
    if set(a.vars) != set(b.vars):
        raise AlphabetMismatch(f"alphabets differ: {a.vars} vs {b.vars}")
    return is_empty(product(a, b, "xor", minimal=False))


# ---------------------------------------------------------------------------
# cubes, dumps, DOT


def state_cubes(row: np.ndarray, k: int) -> list[tuple[str, int]]:
    """Disjoint cubes covering a state's letters; character j refers to variable j."""
    out = []
    row = np.asarray(row)

    def rec(lo, size, var, fixed):
        seg = row[lo:lo + size]
        if (seg == seg[0]).all():
            cube = ["X"] * k
            for v, c in fixed:
                cube[v] = c
            out.append(("".join(cube), int(seg[0])))
            return
        half = size // 2
        rec(lo, half, var - 1, fixed + [(var, "0")])
        rec(lo + half, half, var - 1, fixed + [(var, "1")])

    rec(0, 1 << k, k - 1, [])
    return out


def cube_letters(cube: str) -> np.ndarray:
    k = len(cube)
    idx = np.arange(1 << k, dtype=np.int64)
    mask = np.ones(1 << k, bool)
    for j, c in enumerate(cube):
        if c == "0":
            mask &= ((idx >> j) & 1) == 0
        elif c == "1":
            mask &= ((idx >> j) & 1) == 1
        elif c != "X":
            raise ValueError(f"bad cube character {c!r}")
    return idx[mask]


def dump(a: Dfa, header: list[str] | None = None) -> str:
    lines = [f"dfa {len(a.vars)} {a.n_states} {a.initial}"]
    lines += header or []
    lines.append("vars" + "".join(" " + v for v in a.vars))
    lines.append("acc" + "".join(f" {s}" for s in np.flatnonzero(a.accepting).tolist()))
    for s in range(a.n_states):
        for cube, t in a.transitions(s):
            lines.append(f"t {s} {cube or '-'} {t}")
    return "\n".join(lines) + "\n"


def load(text: str) -> tuple[Dfa, dict]:
    """Parse a dump; returns the automaton and any extra header lines keyed by first word."""
    extra = {}
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("dfa "):
        raise ValueError("missing 'dfa' header")
    try:
        _, nv, ns, init = lines[0].split()
        nv, ns, init = int(nv), int(ns), int(init)
    except ValueError as exc:
        raise ValueError(f"bad header line {lines[0]!r}") from exc
    vars = None
    acc = np.zeros(ns, bool)
    delta = np.full((ns, 1 << nv), -1, dtype=np.int64)
    for ln in lines[1:]:
        parts = ln.split()
        key = parts[0]
        if key == "vars":
            vars = parts[1:]
        elif key == "acc":
            acc[[int(x) for x in parts[1:]]] = True
        elif key == "t":
            src, cube, dst = int(parts[1]), parts[2], int(parts[3])
            cube = "" if cube == "-" else cube
            if len(cube) != nv:
                raise ValueError(f"cube {cube!r} has wrong width")
            letters = cube_letters(cube)
            if (delta[src, letters] >= 0).any():
                raise ValueError(f"overlapping cubes at state {src}")
            delta[src, letters] = dst
        else:
            extra[key] = parts[1:]
    if vars is None or len(vars) != nv:
        raise ValueError("missing or malformed 'vars' line")
    if (delta < 0).any():
        raise ValueError("cubes do not cover every letter")
    return Dfa(vars, delta, acc, init), extra


def to_dot(a: Dfa, name: str = "dfa") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  start [shape=point];']
    for s in range(a.n_states):
        shape = "doublecircle" if a.accepting[s] else "circle"
        lines.append(f"  {s} [shape={shape}];")
    lines.append(f"  start -> {a.initial};")
    lines.append("  // cube characters follow: " + " ".join(a.vars))
    for s in range(a.n_states):
        for cube, t in a.transitions(s):
            lines.append(f'  {s} -> {t} [label="{cube}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
