"""Analysis of synthesized supervisors: must-dominance, long-run expected value
of a property under uniform random inputs, and closed-loop simulation.
"""
from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from . import dfa as D
from .synth import Controller, SignatureMismatch, Supervisor

# ---------------------------------------------------------------------------
# must dominance


def must_inputs(sup: Supervisor, commit: D.Dfa) -> D.Dfa:
    """Input words on which every output sequence the supervisor allows satisfies ``commit``."""
    if set(commit.vars) - set(sup.io.vars):
        raise SignatureMismatch(f"commitment mentions variables outside {sup.io.vars}")
    c = D.extend(commit, sup.io.vars)
    bad = D.product(sup.dfa, c, "diff")
    if sup.io.outputs:
        bad = D.project(bad, list(sup.io.outputs))
    return D.complement(bad)


LEFT = "LeftDominates"
RIGHT = "RightDominates"
EQUIVALENT = "MustEquivalent"
INCOMPARABLE = "Incomparable"


@dataclass
class DominanceResult:
    verdict: str
    only_left: tuple | None = None  # shortest input word guaranteed only by the left supervisor
    only_right: tuple | None = None


def must_dominance(s1: Supervisor, s2: Supervisor, commit: D.Dfa) -> DominanceResult:
    if set(s1.io.inputs) != set(s2.io.inputs):
        raise SignatureMismatch("supervisors have different inputs")
    m1 = must_inputs(s1, commit)
    m2 = D.extend(must_inputs(s2, commit), m1.vars)
    only_left = D.difference_witness(m1, m2)
    only_right = D.difference_witness(m2, m1)
    if only_left is None and only_right is None:
        verdict = EQUIVALENT
    elif only_left is None:
        verdict = RIGHT
    elif only_right is None:
        verdict = LEFT
    else:
        verdict = INCOMPARABLE
    return DominanceResult(verdict, only_left, only_right)


# ---------------------------------------------------------------------------
# Markov chains


@dataclass
class Dtmc:
    """Chain where every state moves to ``succ[s, i]`` with probability 1/len(inputs)."""

    succ: np.ndarray
    accepting: np.ndarray
    initial: int = 0

    @property
    def n_states(self) -> int:
        return self.succ.shape[0]

    def matrix(self) -> sparse.csr_matrix:
        n, k = self.succ.shape
        rows = np.repeat(np.arange(n), k)
        return sparse.csr_matrix((np.full(n * k, 1.0 / k), (rows, self.succ.ravel())), shape=(n, n))

    def rows(self) -> list[list[tuple[float, int]]]:
        m = self.matrix()
        out = []
        for s in range(self.n_states):
            lo, hi = m.indptr[s], m.indptr[s + 1]
            out.append([(float(p), int(t)) for p, t in zip(m.data[lo:hi], m.indices[lo:hi])])
        return out


def build_dtmc(cnt: Supervisor, prop: D.Dfa) -> Dtmc:
    """Closed loop of a controller with a property monitor under uniform inputs."""
    if not cnt.is_deterministic():
        raise ValueError("expected value needs a deterministic controller")
    io = cnt.io
    if set(prop.vars) - set(io.vars):
        raise SignatureMismatch(f"property mentions variables outside {io.vars}")
    p = D.extend(prop, io.vars)
    c = cnt.dfa
    allowed = c.accepting[c.delta]
    pairs, pdelta = D._product_states(c.delta, p.delta, c.initial, p.initial, allowed=allowed)
    n = len(pairs)
    view = pdelta.reshape(n, io.n_out, io.n_in).transpose(0, 2, 1)
    succ = view.max(axis=2)
    if (succ < 0).any():
        raise RuntimeError("controller blocks on some input")
    return Dtmc(succ.astype(np.int64), p.accepting[pairs[:, 1]].copy(), 0)


def long_run_value(m: Dtmc) -> float:
    """Long-run fraction of time spent in accepting states, starting from the initial state."""
    P = m.matrix()
    n = m.n_states
    ncomp, labels = connected_components(P, directed=True, connection="strong")
    r, c = P.nonzero()
    leaving = labels[r] != labels[c]
    non_bottom = np.zeros(ncomp, bool)
    non_bottom[labels[r[leaving]]] = True
    value = np.zeros(n)
    in_bscc = np.zeros(n, bool)
    acc = m.accepting.astype(float)
    for comp in np.flatnonzero(~non_bottom):
        states = np.flatnonzero(labels == comp)
        in_bscc[states] = True
        pi = _stationary(P[states][:, states])
        value[states] = float(pi @ acc[states])
    if in_bscc[m.initial]:
        return float(value[m.initial])
    trans = np.flatnonzero(~in_bscc)
    rec = np.flatnonzero(in_bscc)
    Q = P[trans][:, trans]
    R = P[trans][:, rec]
    A = sparse.identity(len(trans), format="csc") - Q.tocsc()
    h = spsolve(A, R @ value[rec])
    h = np.atleast_1d(h)
    res = np.abs(A @ h - R @ value[rec]).max() if len(trans) else 0.0
    if not np.isfinite(h).all() or res > 1e-8:
        raise ArithmeticError(f"absorption solve failed (residual {res:.3g})")
    return float(h[np.searchsorted(trans, m.initial)])


def _stationary(P: sparse.csr_matrix) -> np.ndarray:
    k = P.shape[0]
    if k == 1:
        return np.ones(1)
    A = (P.T - sparse.identity(k)).tolil()
    A[k - 1, :] = np.ones(k)
    b = np.zeros(k)
    b[k - 1] = 1.0
    pi = np.atleast_1d(spsolve(A.tocsc(), b))
    res = np.abs(P.T @ pi - pi).max()
    if not np.isfinite(pi).all() or res > 1e-9:
        raise ArithmeticError(f"stationary solve failed (residual {res:.3g})")
    return pi


def expected_value(cnt: Supervisor, prop: D.Dfa) -> float:
    return long_run_value(build_dtmc(cnt, prop))


def monte_carlo_value(m: Dtmc, steps: int, rng: np.random.Generator) -> float:
    """Fraction of ``steps`` random moves that land in an accepting state."""
    choices = rng.integers(0, m.succ.shape[1], size=steps)
    succ = m.succ.tolist()
    acc = m.accepting.tolist()
    s = m.initial
    hits = 0
    for i in choices.tolist():
        s = succ[s][i]
        hits += acc[s]
    return hits / steps


def export_mrmc(m: Dtmc) -> tuple[str, str]:
    """(.tra text, .lab text); states are numbered from 1."""
    P = m.matrix().tocoo()
    order = np.lexsort((P.col, P.row))
    lines = [f"STATES {m.n_states}", f"TRANSITIONS {P.nnz}"]
    for k in order.tolist():
        lines.append(f"{P.row[k] + 1} {P.col[k] + 1} {P.data[k]:.6f}")
    lab = ["#DECLARATION", "target", "#END"]
    lab += [f"{s + 1} target" for s in np.flatnonzero(m.accepting).tolist()]
    return "\n".join(lines) + "\n", "\n".join(lab) + "\n"


# ---------------------------------------------------------------------------
# simulation


def simulate(cnt: Controller, inputs, props=()) -> list[dict]:
    """Run the closed loop on an input trace.

    ``inputs`` is a sequence of mappings from input name to 0/1. Each output
    row holds inputs, outputs and, for every (name, automaton) in ``props``,
    whether the property holds on the prefix up to that step.
    """
    io = cnt.io
    monitors = []
    for name, a in props:
        if set(a.vars) - set(io.vars):
            raise SignatureMismatch(f"property {name!r} mentions variables outside {io.vars}")
        monitors.append((name, D.extend(a, io.vars)))
    state = cnt.dfa.initial
    mstate = [a.initial for _, a in monitors]
    out = []
    nin = len(io.inputs)
    for row in inputs:
        missing = set(io.inputs) - set(row)
        if missing:
            raise SignatureMismatch(f"trace lacks input column(s) {sorted(missing)}")
        i = sum(int(bool(int(row[v]))) << j for j, v in enumerate(io.inputs))
        o, state = cnt.step(state, i)
        letter = i | (o << nin)
        rec = {v: int(row[v]) for v in io.inputs}
        rec.update({v: (o >> j) & 1 for j, v in enumerate(io.outputs)})
        for k, (name, a) in enumerate(monitors):
            mstate[k] = int(a.delta[mstate[k], letter])
            rec[name] = int(a.accepting[mstate[k]])
        out.append(rec)
    return out


def read_trace(text: str) -> list[dict]:
    return [dict(r) for r in csv.DictReader(_io.StringIO(text))]


def write_trace(rows: list[dict], columns) -> str:
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: r[c] for c in columns})
    return buf.getvalue()
