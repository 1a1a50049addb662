"""Generators for the two benchmark specifications: a synchronous bus arbiter
and a mine pump controller.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .formula import (
    EP, All, AllButLast, And, Box, Chop, Implies, KBounded, Not, PAnd, PImplies, PNot,
    POr, Point, SCount, SLen, TrueF, Var, conj, pconj, pdisj, prop_text, to_text,
)
from .robust import PARAMETRIC, Criterion, RobustSpec


@dataclass(frozen=True)
class CaseStudy:
    assumption: object
    commitment: object
    inputs: tuple
    outputs: tuple
    default_order: tuple

    def robust(self, criterion: Criterion, indicator: str = "A") -> RobustSpec:
        return RobustSpec(self.assumption, self.commitment, criterion, self.inputs, self.outputs, indicator)


# ---------------------------------------------------------------------------
# arbiter


def _req(n):
    return tuple(f"r{j}" for j in range(1, n + 1))


def _ack(n):
    return tuple(f"a{j}" for j in range(1, n + 1))


def atmost(names, i: int):
    """Proposition: at most ``i`` of ``names`` are true (disjunction of full valuations)."""
    terms = []
    for bits in itertools.product((0, 1), repeat=len(names)):
        if sum(bits) <= i:
            terms.append(pconj(*[Var(v) if b else PNot(Var(v)) for v, b in zip(names, bits)]))
    return pdisj(*terms)


def mutex_prop(acks):
    return pconj(*[PNot(PAnd(Var(x), Var(y))) for x, y in itertools.combinations(acks, 2)])


def noloss_prop(reqs, acks):
    return PImplies(pdisj(*map(Var, reqs)), pdisj(*map(Var, acks)))


def nospurious_prop(reqs, acks):
    return pconj(*[PImplies(Var(a), Var(r)) for r, a in zip(reqs, acks)])


def response(req: str, ack: str, k: int):
    """If req held over the last k points, ack held at least once among them."""
    window = SLen("=", k - 1)
    return Implies(
        Chop(TrueF(), And(All(Var(req)), window)),
        Chop(TrueF(), And(SCount(Var(ack), ">", 0), window)),
    )


def arbiter(n: int, k: int, i: int) -> CaseStudy:
    if n < 1 or k < 1 or not 0 <= i <= n:
        raise ValueError("arbiter needs n >= 1, k >= 1 and 0 <= i <= n")
    reqs, acks = _req(n), _ack(n)
    commit = conj(
        EP(mutex_prop(acks)),
        EP(noloss_prop(reqs, acks)),
        EP(nospurious_prop(reqs, acks)),
        *[response(r, a, k) for r, a in zip(reqs, acks)],
    )
    assume = EP(atmost(reqs, i))
    return CaseStudy(assume, commit, reqs, acks, acks)


def arbiter_commit(n: int, k: int):
    return arbiter(n, k, n).commitment


# ---------------------------------------------------------------------------
# mine pump

MINE_INPUTS = ("HH2O", "HCH4")
MINE_OUTPUTS = ("PumpOn",)


def minepump(w: int, eps: int, zeta: int, kappa: int, window: int | None = None) -> CaseStudy:
    """Mine pump with every conjunct restricted to the most recent ``window`` cycles.

    ``window`` defaults to w + 1 (see the README for why).
    """
    if min(w, eps, zeta, kappa) < 1:
        raise ValueError("mine pump parameters must be positive")
    n = w + 1 if window is None else window
    h2o, ch4, pump = Var("HH2O"), Var("HCH4"), Var("PumpOn")
    methane_sep = Box(Implies(Chop(AllButLast(ch4), Chop(AllButLast(PNot(ch4)), Point(ch4))), SLen(">", zeta)))
    methane_len = Box(Implies(All(ch4), SLen("<", kappa)))
    pump_cap = Box(Not(And(SLen("=", eps), Chop(All(PAnd(pump, h2o)), Point(h2o)))))
    safety = All(PImplies(POr(ch4, PNot(h2o)), PNot(pump)))
    water = Box(Implies(All(h2o), SLen("<", w)))
    assume = conj(KBounded(methane_sep, n), KBounded(methane_len, n), KBounded(pump_cap, n))
    commit = conj(KBounded(safety, n), KBounded(water, n))
    return CaseStudy(assume, commit, MINE_INPUTS, MINE_OUTPUTS, ("PumpOn",))


# ---------------------------------------------------------------------------
# QSF emitters


def _crit_call(c: Criterion, A: str = "A") -> str:
    if c.name in PARAMETRIC:
        return f"{c.name}({A}, K, B)"
    return f"{c.name}({A})"


def _crit_constants(c: Criterion) -> str:
    if c.name in PARAMETRIC:
        return f", K = {c.k}, B = {c.b}"
    return ""


def _robust_blocks(c: Criterion) -> str:
    return (
        "hardreq{\n"
        "  useind A, C;\n"
        f"  {_crit_call(c)} => EP(C);\n"
        "}\n"
        "softreq{\n"
        "  useind C;\n"
        "  (C);\n"
        "}\n"
    )


def arbiter_qsf(n: int, k: int, i: int, criterion: Criterion) -> str:
    reqs, acks = _req(n), _ack(n)
    resp = [f"response({r}, {a})" for r, a in zip(reqs, acks)]
    spur = [f"nospuriousack({a}, {r})" for r, a in zip(reqs, acks)]
    return (
        '#qsf "arbiter"\n'
        "interface{\n"
        f"  input {', '.join(reqs)};\n"
        f"  output {', '.join(acks)}, A, C;\n"
        f"  constant k = {k}{_crit_constants(criterion)};\n"
        "}\n"
        "definitions{\n"
        f"  dc exclusion(){{ true^<{prop_text(mutex_prop(acks))}>; }}\n"
        f"  dc noloss(){{ true^<{prop_text(noloss_prop(reqs, acks))}>; }}\n"
        "  dc nospuriousack(a, r){ true^<a => r>; }\n"
        "  dc response(r, a){ (true^(slen = k-1 && [[r]])) => (true^(slen = k-1 && (scount a >= 1))); }\n"
        f"  dc assume(){{ true^<{prop_text(atmost(reqs, i))}>; }}\n"
        "  dc commit(){\n"
        f"    exclusion() && noloss() && {' && '.join(spur)} &&\n"
        f"    {' && '.join(resp)};\n"
        "  }\n"
        "}\n"
        "indefinitions{\n"
        "  A : assume();\n"
        "  C : commit();\n"
        "}\n"
        + _robust_blocks(criterion)
    )


def minepump_qsf(w: int, eps: int, zeta: int, kappa: int, criterion: Criterion,
                 window: int | None = None) -> str:
    n = w + 1 if window is None else window
    return (
        '#qsf "minepump"\n'
        "interface{\n"
        "  input HH2O, HCH4;\n"
        "  output PumpOn, A, C;\n"
        f"  constant w = {w}, epsilon = {eps}, zeta = {zeta}, kappa = {kappa}, n = {n}"
        f"{_crit_constants(criterion)};\n"
        "}\n"
        "definitions{\n"
        "  // methane release assumptions\n"
        "  dc methane1(HCH4){ KBOUNDED([]([HCH4]^[!HCH4]^<HCH4> => slen > zeta), n); }\n"
        "  dc methane2(HCH4){ KBOUNDED([]([[HCH4]] => slen < kappa), n); }\n"
        "  // pump capacity assumption\n"
        "  dc pumpcap(HH2O, PUMPON){ KBOUNDED([]!(slen = epsilon && ([[PUMPON && HH2O]]^<HH2O>)), n); }\n"
        "  dc assume(HH2O, HCH4, PUMPON){ methane1(HCH4) && methane2(HCH4) && pumpcap(HH2O, PUMPON); }\n"
        "  // safety conditions\n"
        "  dc req1(HH2O, HCH4, PUMPON){ KBOUNDED([[(HCH4 || !HH2O) => !PUMPON]], n); }\n"
        "  dc req2(HH2O){ KBOUNDED([]([[HH2O]] => slen < w), n); }\n"
        "  dc commit(HH2O, HCH4, PUMPON){ req1(HH2O, HCH4, PUMPON) && req2(HH2O); }\n"
        "}\n"
        "indefinitions{\n"
        "  A : assume(HH2O, HCH4, PumpOn);\n"
        "  C : commit(HH2O, HCH4, PumpOn);\n"
        "}\n"
        + _robust_blocks(criterion)
    )


def formula_text(f) -> str:
    return to_text(f)
