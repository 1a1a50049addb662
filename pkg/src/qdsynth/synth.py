"""Supervisor synthesis: maximally permissive supervisors, horizon-optimal
pruning by value iteration, and determinization by output ordering.

Supervisor automata always use the variable order inputs + outputs, so a letter
is ``i | (o << len(inputs))`` and the transition table reshapes to
``(states, outputs, inputs)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dfa as D


class Unrealizable(Exception):
    pass


class SignatureMismatch(ValueError):
    pass


@dataclass(frozen=True)
class IoSignature:
    inputs: tuple
    outputs: tuple

    def __init__(self, inputs, outputs):
        object.__setattr__(self, "inputs", tuple(inputs))
        object.__setattr__(self, "outputs", tuple(outputs))
        if set(self.inputs) & set(self.outputs):
            raise SignatureMismatch("inputs and outputs overlap")
        if len(set(self.vars)) != len(self.vars):
            raise SignatureMismatch("duplicate variable in signature")

    @property
    def vars(self) -> tuple:
        return self.inputs + self.outputs

    @property
    def n_in(self) -> int:
        return 1 << len(self.inputs)

    @property
    def n_out(self) -> int:
        return 1 << len(self.outputs)


@dataclass(frozen=True)
class SynthParams:
    horizon: int = 50
    discount: float = 0.9
    delta: float = 1e-4

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if not 0 < self.discount <= 1:
            raise ValueError("discount must lie in (0, 1]")
        if self.delta < 0:
            raise ValueError("tie tolerance must be non-negative")


def _reorder(a: D.Dfa, io: IoSignature) -> D.Dfa:
    if set(a.vars) != set(io.vars):
        raise SignatureMismatch(f"automaton over {a.vars} does not match signature {io.vars}")
    return D.extend(a, io.vars)


class Supervisor:
    """Non-blocking output-nondeterministic Mealy machine with a reject sink.

    Every non-accepting state other than the initial one is the reject sink;
    the initial state only consumes the first letter.
    """

    kind = "supervisor"

    def __init__(self, dfa: D.Dfa, io: IoSignature):
        self.dfa = _reorder(dfa, io)
        self.io = io
        a = self.dfa
        rej = [s for s in np.flatnonzero(~a.accepting).tolist() if s != a.initial]
        if len(rej) > 1:
            raise ValueError("supervisor has more than one rejecting state")
        self.reject = rej[0] if rej else None
        if self.reject is not None and not (a.delta[self.reject] == self.reject).all():
            raise ValueError("reject state is not a sink")

    @property
    def n_states(self) -> int:
        return self.dfa.n_states

    def allowed(self) -> np.ndarray:
        """(states, inputs, outputs) mask of transitions that stay out of reject."""
        a = self.dfa
        ok = a.accepting[a.delta]
        return ok.reshape(a.n_states, self.io.n_out, self.io.n_in).transpose(0, 2, 1)

    def targets(self) -> np.ndarray:
        a = self.dfa
        return a.delta.reshape(a.n_states, self.io.n_out, self.io.n_in).transpose(0, 2, 1)

    def live_states(self) -> np.ndarray:
        """States other than reject (the initial state included)."""
        live = self.dfa.accepting.copy()
        live[self.dfa.initial] = True
        return live

    def is_nonblocking(self) -> bool:
        return bool(self.allowed().any(axis=2)[self.live_states()].all())

    def is_deterministic(self) -> bool:
        return bool((self.allowed().sum(axis=2)[self.live_states()] <= 1).all())

    def output_choices(self, state: int, i: int) -> list[int]:
        return np.flatnonzero(self.allowed()[state, i]).tolist()

    def dump(self) -> str:
        header = [
            f"kind {self.kind}",
            "io" + "".join(" " + v for v in self.io.inputs) + " |" + "".join(" " + v for v in self.io.outputs),
            f"reject {self.reject if self.reject is not None else 'none'}",
        ]
        return D.dump(self.dfa, header)

    def __repr__(self):
        return f"{type(self).__name__}(states={self.n_states}, io={self.io.inputs}|{self.io.outputs})"


class Controller(Supervisor):
    kind = "controller"

    def __init__(self, dfa: D.Dfa, io: IoSignature):
        super().__init__(dfa, io)
        if not self.is_deterministic():
            raise ValueError("controller has more than one output for some input")
        allowed = self.allowed()
        # (states, inputs) tables of the chosen output (-1 if blocked) and the successor
        self.choice = np.where(allowed.any(axis=2), allowed.argmax(axis=2), -1)
        letters = np.arange(io.n_in)[None, :] | (np.maximum(self.choice, 0) << len(io.inputs))
        self.successor = np.take_along_axis(self.dfa.delta, letters, axis=1)

    def step(self, state: int, i: int) -> tuple[int, int]:
        """(output valuation, next state) for input valuation i."""
        o = int(self.choice[state, i])
        if o < 0:
            raise RuntimeError(f"controller blocks in state {state} on input {i}")
        return o, int(self.successor[state, i])


def load_supervisor(text: str) -> Supervisor:
    a, extra = D.load(text)
    if "io" not in extra or "|" not in extra["io"]:
        raise ValueError("supervisor dump lacks an 'io' line")
    io_parts = extra["io"]
    cut = io_parts.index("|")
    io = IoSignature(io_parts[:cut], io_parts[cut + 1:])
    kind = (extra.get("kind") or ["supervisor"])[0]
    cls = Controller if kind == "controller" else Supervisor
    return cls(a, io)


def _from_mask(a: D.Dfa, keep: np.ndarray, live: np.ndarray, io: IoSignature, cls=Supervisor):
    """Supervisor with transitions outside ``keep`` redirected to a fresh reject sink.

    ``keep`` is an (n, L) letter mask, ``live`` the states that stay accepting
    (the initial state is handled by the nonempty-word convention).
    """
    n, L = a.delta.shape
    r = n
    delta = np.vstack([np.where(keep, a.delta, r), np.full((1, L), r)])
    acc = np.append(live, False)
    acc[a.initial] = False
    return cls(D.minimize(D.Dfa(a.vars, delta, acc, a.initial)), io)


def _letters_mask(mask_io: np.ndarray) -> np.ndarray:
    """(n, inputs, outputs) -> (n, letters)."""
    n = mask_io.shape[0]
    return mask_io.transpose(0, 2, 1).reshape(n, -1)


def mps(hard: D.Dfa, io: IoSignature) -> Supervisor:
    """Maximally permissive supervisor keeping every run inside L(hard).

    Raises ``Unrealizable`` if the environment can force a violation.
    """
    a = _reorder(hard, io)
    n, L = a.delta.shape
    # fresh pre-initial state so the initial position is never re-entered
    pre = n
    delta = np.vstack([a.delta, a.delta[a.initial][None, :]])
    acc = np.append(a.accepting, False)
    a = D.Dfa(a.vars, delta, acc, pre)
    tgt = a.delta.reshape(n + 1, io.n_out, io.n_in).transpose(0, 2, 1)
    good = a.accepting.copy()
    while True:
        win = good[tgt].any(axis=2).all(axis=1)
        new = good & win
        if (new == good).all():
            break
        good = new
    if not good[tgt[pre]].any(axis=1).all():
        raise Unrealizable("the environment can force a violation of the hard requirement")
    keep = good[a.delta]
    return _from_mask(a, keep, good, io)


# ---------------------------------------------------------------------------
# horizon-optimal pruning


@dataclass
class Arena:
    """Product of a supervisor with a soft-requirement monitor.

    ``delta[p, i, o]`` is the successor product state (-1 where the
    supervisor forbids the output), ``reward`` is 1 where the monitor's
    target state accepts.
    """

    io: IoSignature
    pairs: np.ndarray
    delta: np.ndarray
    reward: np.ndarray
    allowed: np.ndarray
    initial: int = 0

    @property
    def n_states(self) -> int:
        return self.delta.shape[0]

    def values(self, steps: int, discount: float) -> np.ndarray:
        """Val(., steps): expected discounted reward count over the next ``steps`` moves."""
        v = np.zeros(self.n_states)
        for _ in range(steps):
            v = self.q_values(v, discount).max(axis=2).mean(axis=1)
        return v

    def q_values(self, v: np.ndarray, discount: float) -> np.ndarray:
        q = self.reward + discount * v[np.maximum(self.delta, 0)]
        return np.where(self.allowed, q, -np.inf)

    def retained(self, params: SynthParams) -> np.ndarray:
        q = self.q_values(self.values(params.horizon - 1, params.discount), params.discount)
        best = q.max(axis=2, keepdims=True)
        return self.allowed & (q >= best - params.delta)


def arena(sup: Supervisor, soft: D.Dfa) -> Arena:
    io = sup.io
    soft = _reorder(soft, io)
    s = sup.dfa
    allowed_letters = s.accepting[s.delta]
    pairs, pdelta = D._product_states(s.delta, soft.delta, s.initial, soft.initial, allowed=allowed_letters)
    n = len(pairs)
    reward = soft.accepting[soft.delta[pairs[:, 1]]].astype(float)

    def view(x):
        return x.reshape(n, io.n_out, io.n_in).transpose(0, 2, 1)

    return Arena(io, pairs, view(pdelta), view(reward), view(pdelta >= 0))


def mphos(sup: Supervisor, soft: D.Dfa, params: SynthParams = SynthParams()) -> Supervisor:
    """Keep, at every state and input, the outputs within ``delta`` of the best H-step value."""
    ar = arena(sup, soft)
    keep = ar.retained(params)
    n = ar.n_states
    L = sup.dfa.n_letters
    delta_letters = _letters_mask(np.maximum(ar.delta, 0))
    a = D.Dfa(sup.io.vars, delta_letters, np.zeros(n, bool), 0)
    live = sup.dfa.accepting[ar.pairs[:, 0]]
    out = _from_mask(a, _letters_mask(keep), live, sup.io)
    assert out.dfa.n_letters == L
    return out


# ---------------------------------------------------------------------------
# determinization


def parse_literal(lit: str) -> tuple[str, bool]:
    lit = lit.strip()
    if lit.startswith("!"):
        return lit[1:].strip(), False
    return lit, True


def output_ranking(outputs, order) -> np.ndarray:
    """Rank of every output valuation (0 = most preferred) under a literal ordering.

    Listed literals are compared first in order; outputs not mentioned follow
    as negative literals in declaration order.
    """
    outputs = list(outputs)
    lits = [parse_literal(x) for x in order]
    names = [v for v, _ in lits]
    for v in names:
        if v not in outputs:
            raise SignatureMismatch(f"ordering mentions unknown output {v!r}")
    if len(set(names)) != len(names):
        raise ValueError("at most one literal per output variable")
    lits += [(v, False) for v in outputs if v not in names]
    keys = []
    for o in range(1 << len(outputs)):
        keys.append(tuple(0 if bool(o >> outputs.index(v) & 1) == pol else 1 for v, pol in lits))
    order_idx = sorted(range(len(keys)), key=keys.__getitem__)
    rank = np.empty(len(keys), dtype=np.int64)
    rank[order_idx] = np.arange(len(keys))
    return rank


def det_by_order(sup: Supervisor, order) -> Controller:
    """Controller choosing, at each state and input, the most preferred allowed output."""
    rank = output_ranking(sup.io.outputs, order)
    allowed = sup.allowed()
    score = np.where(allowed, rank[None, None, :], np.iinfo(np.int64).max)
    best = score.argmin(axis=2)
    keep = np.zeros_like(allowed)
    n, ni, _ = allowed.shape
    s_idx, i_idx = np.meshgrid(np.arange(n), np.arange(ni), indexing="ij")
    keep[s_idx, i_idx, best] = True
    keep &= allowed
    a = sup.dfa
    return _from_mask(a, _letters_mask(keep), a.accepting.copy(), sup.io, cls=Controller)


def must_monotone_check(hard1: D.Dfa, hard2: D.Dfa, io: IoSignature) -> bool:
    """Whether L(MPS(hard1)) is contained in L(MPS(hard2)), given that hard1 implies hard2."""
    if not D.includes(hard2, hard1):
        raise ValueError("precondition violated: hard1 does not imply hard2")
    try:
        s1 = mps(hard1, io)
    except Unrealizable:
        return True
    s2 = mps(hard2, io)
    return D.includes(s2.dfa, s1.dfa)
