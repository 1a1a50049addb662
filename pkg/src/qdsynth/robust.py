"""Robustness criteria: error types, error scopes, the criteria catalog,
indicator cascades, lowering of robust specifications and the implication lattice.
"""
from __future__ import annotations

from dataclasses import dataclass

from .formula import (
    EP, All, And, Box, Chop, Diamond, FalseF, Iff, Implies, Not, PNot, Point, Pref, SCount,
    SLen, TrueF, Var, conj, free_vars,
)

# ---------------------------------------------------------------------------
# error types


def local_err(A: str):
    return Chop(TrueF(), Point(PNot(Var(A))))


def count_err(A: str, k: int):
    return SCount(PNot(Var(A)), ">", k)


def burst_err(A: str, k: int):
    return And(All(PNot(Var(A))), SLen(">=", k))


def has_burst_err(A: str, k: int):
    return Diamond(burst_err(A, k))


def has_no_recovery(A: str, b: int):
    return Box(Implies(All(Var(A)), SLen("<", b - 1)))


def recovery_err(b: int, err, A: str):
    return And(err, has_no_recovery(A, b))


# ---------------------------------------------------------------------------
# error scopes


def never_in_past(err):
    return Not(Diamond(err))


def never_in_suffix(err):
    return Not(Chop(TrueF(), err))


def never_in_past_len(b: int, err):
    return Not(Diamond(And(SLen("<=", b - 1), err)))


def never_in_suffix_len(b: int, err):
    return Not(Chop(TrueF(), And(SLen("<=", b - 1), err)))


# ---------------------------------------------------------------------------
# criteria

CRITERIA = (
    "AssumeFalse", "BeCorrect", "BeCurrentlyCorrect",
    "ResCnt", "ResCntInt", "ResBurst", "ResBurstInt",
    "LenCnt", "LenCntInt", "LenBurst", "LenBurstInt",
    "AssumeTrue",
)
PARAMETRIC = frozenset(CRITERIA[3:11])
NON_RECOVERABLE = ("AssumeFalse", "BeCorrect", "ResCnt", "LenCnt", "ResBurst", "LenBurst")

# implication edges c1 -> c2 meaning |= c1 => c2; ResBurst stands for the
# node whose two criteria are claimed equivalent
LATTICE_EDGES = (
    ("AssumeFalse", "BeCorrect"),
    ("BeCorrect", "ResCnt"),
    ("BeCorrect", "BeCurrentlyCorrect"),
    ("ResCnt", "LenCnt"),
    ("ResCnt", "ResCntInt"),
    ("LenCnt", "ResBurst"),
    ("LenCnt", "LenCntInt"),
    ("ResCntInt", "ResBurstInt"),
    ("ResCntInt", "LenCntInt"),
    ("ResBurst", "ResBurstInt"),
    ("ResBurstInt", "LenBurstInt"),
    ("LenCntInt", "LenBurstInt"),
    ("LenBurstInt", "AssumeTrue"),
    ("BeCurrentlyCorrect", "AssumeTrue"),
)
LATTICE_EQUIVALENCE = ("ResBurst", "LenBurst")


@dataclass(frozen=True)
class Criterion:
    name: str
    k: int | None = None
    b: int | None = None

    def __post_init__(self):
        if self.name not in CRITERIA:
            raise ValueError(f"unknown criterion {self.name!r}; expected one of {', '.join(CRITERIA)}")
        if self.name in PARAMETRIC:
            if self.k is None or self.b is None or self.k < 1 or self.b < 1:
                raise ValueError(f"{self.name} needs positive parameters K and B")
        elif self.k is not None or self.b is not None:
            object.__setattr__(self, "k", None)
            object.__setattr__(self, "b", None)

    def __str__(self):
        if self.name in PARAMETRIC:
            return f"{self.name}({self.k},{self.b})"
        return self.name

    @classmethod
    def make(cls, name: str, k: int | None = None, b: int | None = None) -> "Criterion":
        """Build a criterion, dropping K and B when the criterion takes none."""
        if name in PARAMETRIC:
            return cls(name, k, b)
        return cls(name)


def criterion_formula(c: Criterion, A: str = "A"):
    name, k, b = c.name, c.k, c.b
    if name == "AssumeFalse":
        return FalseF()
    if name == "AssumeTrue":
        return TrueF()
    if name == "BeCorrect":
        return never_in_past(local_err(A))
    if name == "BeCurrentlyCorrect":
        return never_in_suffix(local_err(A))
    err = count_err(A, k) if "Cnt" in name else has_burst_err(A, k)
    if name.startswith("Res"):
        scope = never_in_suffix if name.endswith("Int") else never_in_past
        return scope(recovery_err(b, err, A))
    scope = never_in_suffix_len if name.endswith("Int") else never_in_past_len
    return scope(b, err)


def builtin_macro(name: str, args: list):
    """Formula for a built-in macro call in a specification file, or None if unknown.

    Criteria take ``(A)`` or ``(A, K, B)``; error types and scopes mirror the
    builder functions above.
    """
    def var(x):
        if isinstance(x, str):
            return x
        if isinstance(x, EP) and isinstance(x.prop, Var):
            return x.prop.name
        raise ValueError(f"{name}: expected a variable, got {x!r}")

    def num(x):
        if isinstance(x, int):
            return x
        raise ValueError(f"{name}: expected an integer constant, got {x!r}")

    def form(x):
        if isinstance(x, str):
            return EP(Var(x))
        if isinstance(x, int):
            raise ValueError(f"{name}: expected a formula, got {x!r}")
        return x

    def arity(n):
        if len(args) != n:
            raise ValueError(f"{name} expects {n} argument(s), got {len(args)}")

    if name in CRITERIA:
        if name in PARAMETRIC:
            arity(3)
            return criterion_formula(Criterion(name, num(args[1]), num(args[2])), var(args[0]))
        arity(1)
        return criterion_formula(Criterion(name), var(args[0]))
    if name == "LocalErr":
        arity(1)
        return local_err(var(args[0]))
    if name in ("CountErr", "BurstErr", "HasBurstErr", "HasNoRecovery"):
        arity(2)
        f = {"CountErr": count_err, "BurstErr": burst_err,
             "HasBurstErr": has_burst_err, "HasNoRecovery": has_no_recovery}[name]
        return f(var(args[0]), num(args[1]))
    if name == "RecoveryErr":
        arity(3)
        return recovery_err(num(args[1]), form(args[2]), var(args[0]))
    if name in ("NeverInPast", "NeverInSuffix"):
        arity(1)
        return (never_in_past if name == "NeverInPast" else never_in_suffix)(form(args[0]))
    if name in ("NeverInPastLen", "NeverInSuffixLen"):
        arity(2)
        f = never_in_past_len if name == "NeverInPastLen" else never_in_suffix_len
        return f(num(args[0]), form(args[1]))
    return None


# ---------------------------------------------------------------------------
# cascades and lowering


def indicator(d, w: str):
    """``pref(EP(w) <=> d)``: w is true exactly at the points where d holds."""
    return Pref(Iff(EP(Var(w)), d))


def cascade(d, bindings, check: bool = True):
    """Conjoin ``d`` with an indicator constraint for every (formula, variable) binding."""
    bindings = list(bindings)
    if check:
        names = [w for _, w in bindings]
        if len(set(names)) != len(names):
            raise ValueError("indicator variables must be distinct")
        for di, w in bindings:
            if w in free_vars(di):
                raise ValueError(f"indicator {w!r} occurs in its own definition")
    if not bindings:
        return d
    return conj(d, *[indicator(di, w) for di, w in bindings])


@dataclass(frozen=True)
class RobustSpec:
    assumption: object
    commitment: object
    criterion: Criterion
    inputs: tuple
    outputs: tuple
    indicator: str = "A"

    def __post_init__(self):
        used = free_vars(self.assumption) | free_vars(self.commitment) | set(self.inputs) | set(self.outputs)
        if self.indicator in used:
            raise ValueError(f"indicator {self.indicator!r} is not fresh")


@dataclass(frozen=True)
class Lowered:
    inputs: tuple
    outputs: tuple
    hard: object
    soft: object


def lower(spec: RobustSpec) -> Lowered:
    """Hard and soft requirements of a robust specification.

    The hard requirement is ``(Rb(A) => D_C) && pref(EP(A) <=> D_A)``: the
    indicator constraint is a conjunct, so the controller cannot escape the
    commitment by falsifying A.
    """
    A = spec.indicator
    rb = criterion_formula(spec.criterion, A)
    hard = cascade(Implies(rb, spec.commitment), [(spec.assumption, A)])
    return Lowered(tuple(spec.inputs), tuple(spec.outputs) + (A,), hard, spec.commitment)


# ---------------------------------------------------------------------------
# lattice and propositions


@dataclass
class LatticeEntry:
    left: Criterion
    right: Criterion
    valid: bool
    witness: tuple | None = None


def implication_check(f1, f2, env):
    """(valid, shortest counterexample word) for ``|= f1 => f2``."""
    from . import dfa as D
    from .compile import compile_formula

    a1 = compile_formula(f1, env)
    a2 = compile_formula(f2, env)
    w = D.difference_witness(a1, a2)
    return w is None, w


def lattice_check(pairs, k: int, b: int, A: str = "A") -> list[LatticeEntry]:
    out = []
    for n1, n2 in pairs:
        c1, c2 = Criterion.make(n1, k, b), Criterion.make(n2, k, b)
        valid, w = implication_check(criterion_formula(c1, A), criterion_formula(c2, A), [A])
        out.append(LatticeEntry(c1, c2, valid, w))
    return out


def lattice_pairs() -> list[tuple[str, str]]:
    eq = LATTICE_EQUIVALENCE
    return list(LATTICE_EDGES) + [eq, eq[::-1]]


def proposition_checks(k: int, b: int, A: str = "A") -> list[tuple[str, object, object]]:
    """Instances (label, premise, conclusion) of the error-type and error-scope implications.

    Implications with a hypothesis (Err1 => Err2) are instantiated with every
    valid pair among the error types built from (k, b).
    """
    errs = {
        "LocalErr": local_err(A),
        f"CountErr({k})": count_err(A, k),
        f"BurstErr({k})": burst_err(A, k),
        f"HasBurstErr({k})": has_burst_err(A, k),
    }
    out = [
        ("3a", burst_err(A, k), has_burst_err(A, k)),
        ("3b", has_burst_err(A, k), count_err(A, k)),
    ]
    for j in range(1, k):
        out.append((f"3c CountErr({k})->CountErr({j})", count_err(A, k), count_err(A, j)))
        out.append((f"3c HasBurstErr({k})->HasBurstErr({j})", has_burst_err(A, k), has_burst_err(A, j)))
    for name, e in errs.items():
        out.append((f"3d {name}", recovery_err(b, e, A), e))
    # hypothesis pairs for (e): premises that are themselves valid implications
    hyp = [
        ("BurstErr", burst_err(A, k), "HasBurstErr", has_burst_err(A, k)),
        ("HasBurstErr", has_burst_err(A, k), "CountErr", count_err(A, k)),
        ("BurstErr", burst_err(A, k), "CountErr", count_err(A, k)),
    ]
    for j in range(1, k):
        hyp.append((f"CountErr({k})", count_err(A, k), f"CountErr({j})", count_err(A, j)))
    for n1, e1, n2, e2 in hyp:
        out.append((f"3e {n1}->{n2}", recovery_err(b, e1, A), recovery_err(b, e2, A)))
    scopes = {
        "NeverInPast": never_in_past,
        "NeverInSuffix": never_in_suffix,
        "NeverInPastLen": lambda e: never_in_past_len(b, e),
        "NeverInSuffixLen": lambda e: never_in_suffix_len(b, e),
    }
    for name, e in errs.items():
        out.append((f"4a {name}", never_in_past(e), never_in_suffix(e)))
        out.append((f"4b {name}", never_in_past_len(b, e), never_in_suffix_len(b, e)))
        out.append((f"4c {name}", never_in_past(e), never_in_past_len(b, e)))
        out.append((f"4d {name}", never_in_suffix(e), never_in_suffix_len(b, e)))
    for n1, e1, n2, e2 in hyp:
        for sname, scp in scopes.items():
            out.append((f"4e {sname} {n1}->{n2}", scp(e2), scp(e1)))
    return out
