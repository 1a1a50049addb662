"""Formula data model: propositional and QDDC syntax trees, printing, desugaring.

Every node is a frozen dataclass, so formulas are hashable and can be used as
memo keys by the compiler.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

CMP_OPS = ("<", "<=", "=", ">=", ">")


# ---------------------------------------------------------------------------
# propositional formulas


@dataclass(frozen=True)
class PFalse:
    pass


@dataclass(frozen=True)
class PTrue:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class PNot:
    arg: "Prop"


@dataclass(frozen=True)
class PAnd:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class POr:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class PImplies:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class PIff:
    left: "Prop"
    right: "Prop"


Prop = Union[PFalse, PTrue, Var, PNot, PAnd, POr, PImplies, PIff]


# ---------------------------------------------------------------------------
# comparison constants


@dataclass(frozen=True)
class SymConst:
    """A named constant plus an integer offset, e.g. ``n-1``; resolved by expand."""

    name: str
    offset: int = 0


Const = Union[int, SymConst]


# ---------------------------------------------------------------------------
# QDDC formulas: core constructs


@dataclass(frozen=True)
class Point:
    prop: Prop


@dataclass(frozen=True)
class AllButLast:
    prop: Prop


@dataclass(frozen=True)
class All:
    prop: Prop


@dataclass(frozen=True)
class Unit:
    prop: Prop


@dataclass(frozen=True)
class Chop:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Ex:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class AllQ:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class SLen:
    op: str
    c: Const


@dataclass(frozen=True)
class SCount:
    prop: Prop
    op: str
    c: Const


@dataclass(frozen=True)
class SDur:
    prop: Prop
    op: str
    c: Const


@dataclass(frozen=True)
class TrueF:
    pass


# ---------------------------------------------------------------------------
# surface constructs removed by desugar / expand


@dataclass(frozen=True)
class FalseF:
    pass


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Pt:
    pass


@dataclass(frozen=True)
class Ext:
    pass


@dataclass(frozen=True)
class Diamond:
    arg: "Formula"


@dataclass(frozen=True)
class Box:
    arg: "Formula"


@dataclass(frozen=True)
class Pref:
    arg: "Formula"


@dataclass(frozen=True)
class EP:
    """``true^<prop>``: the proposition holds at the last point of the interval.

    A bare proposition written in formula position parses to this node.
    """

    prop: Prop


@dataclass(frozen=True)
class KBounded:
    arg: "Formula"
    n: Const


@dataclass(frozen=True)
class Call:
    """Application of a user definition or a built-in criterion macro."""

    name: str
    args: tuple


Formula = Union[
    Point, AllButLast, All, Unit, Chop, Not, And, Or, Ex, AllQ, SLen, SCount, SDur, TrueF,
    FalseF, Implies, Iff, Pt, Ext, Diamond, Box, Pref, EP, KBounded, Call,
]

CORE_TYPES = (Point, AllButLast, All, Unit, Chop, Not, And, Or, Ex, AllQ, SLen, SCount, SDur, TrueF)
PROP_TYPES = (PFalse, PTrue, Var, PNot, PAnd, POr, PImplies, PIff)

_PROP_BINARY = {PAnd: "&&", POr: "||", PImplies: "=>", PIff: "<=>"}
_BINARY = {Chop: "^", And: "&&", Or: "||", Implies: "=>", Iff: "<=>"}


# ---------------------------------------------------------------------------
# convenience constructors


def conj(*fs: Formula) -> Formula:
    """Right-nested conjunction; ``TrueF`` when empty."""
    fs = list(fs)
    if not fs:
        return TrueF()
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = And(f, out)
    return out


def disj(*fs: Formula) -> Formula:
    fs = list(fs)
    if not fs:
        return FalseF()
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = Or(f, out)
    return out


def pconj(*ps: Prop) -> Prop:
    ps = list(ps)
    if not ps:
        return PTrue()
    out = ps[-1]
    for p in reversed(ps[:-1]):
        out = PAnd(p, out)
    return out


def pdisj(*ps: Prop) -> Prop:
    ps = list(ps)
    if not ps:
        return PFalse()
    out = ps[-1]
    for p in reversed(ps[:-1]):
        out = POr(p, out)
    return out


# ---------------------------------------------------------------------------
# printing


def _const_text(c: Const) -> str:
    if isinstance(c, SymConst):
        if c.offset > 0:
            return f"{c.name}+{c.offset}"
        if c.offset < 0:
            return f"{c.name}-{-c.offset}"
        return c.name
    return str(c)


def prop_text(p: Prop) -> str:
    """Canonical text of a propositional formula (binary nodes parenthesized)."""
    if isinstance(p, PTrue):
        return "true"
    if isinstance(p, PFalse):
        return "false"
    if isinstance(p, Var):
        return p.name
    if isinstance(p, PNot):
        return "!" + prop_text(p.arg)
    op = _PROP_BINARY.get(type(p))
    if op is None:
        raise TypeError(f"not a propositional formula: {p!r}")
    return f"({prop_text(p.left)} {op} {prop_text(p.right)})"


def _arg_text(a) -> str:
    if isinstance(a, (int, str)):
        return str(a)
    return to_text(a)


def to_text(f: Formula) -> str:
    """Canonical text of a formula; ``parse_formula(to_text(f)) == f``."""
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Pt):
        return "pt"
    if isinstance(f, Ext):
        return "ext"
    if isinstance(f, Point):
        return f"<{prop_text(f.prop)}>"
    if isinstance(f, AllButLast):
        return f"[{prop_text(f.prop)}]"
    if isinstance(f, All):
        return f"[[{prop_text(f.prop)}]]"
    if isinstance(f, Unit):
        return "{{" + prop_text(f.prop) + "}}"
    if isinstance(f, Not):
        return "!" + to_text(f.arg)
    if isinstance(f, Diamond):
        return "<>" + to_text(f.arg)
    if isinstance(f, Box):
        return "[]" + to_text(f.arg)
    if isinstance(f, Pref):
        return f"pref({to_text(f.arg)})"
    if isinstance(f, EP):
        return f"EP({prop_text(f.prop)})"
    if isinstance(f, KBounded):
        return f"KBOUNDED({to_text(f.arg)}, {_const_text(f.n)})"
    if isinstance(f, Call):
        return f"{f.name}({', '.join(_arg_text(a) for a in f.args)})"
    if isinstance(f, Ex):
        return f"(ex {f.var}. {to_text(f.body)})"
    if isinstance(f, AllQ):
        return f"(all {f.var}. {to_text(f.body)})"
    if isinstance(f, SLen):
        return f"(slen {f.op} {_const_text(f.c)})"
    if isinstance(f, SCount):
        return f"(scount {prop_text(f.prop)} {f.op} {_const_text(f.c)})"
    if isinstance(f, SDur):
        return f"(sdur {prop_text(f.prop)} {f.op} {_const_text(f.c)})"
    op = _BINARY.get(type(f))
    if op is None:
        raise TypeError(f"not a formula: {f!r}")
    return f"({to_text(f.left)} {op} {to_text(f.right)})"


# ---------------------------------------------------------------------------
# traversal helpers


def prop_vars(p: Prop) -> set[str]:
    if isinstance(p, Var):
        return {p.name}
    if isinstance(p, PNot):
        return prop_vars(p.arg)
    if isinstance(p, (PAnd, POr, PImplies, PIff)):
        return prop_vars(p.left) | prop_vars(p.right)
    return set()


def free_vars(f: Formula) -> set[str]:
    """Free propositional variables (quantified variables removed)."""
    if isinstance(f, (Point, AllButLast, All, Unit, SCount, SDur, EP)):
        return prop_vars(f.prop)
    if isinstance(f, (Ex, AllQ)):
        return free_vars(f.body) - {f.var}
    if isinstance(f, (Not, Diamond, Box, Pref)):
        return free_vars(f.arg)
    if isinstance(f, KBounded):
        return free_vars(f.arg)
    if isinstance(f, (Chop, And, Or, Implies, Iff)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Call):
        out: set[str] = set()
        for a in f.args:
            if not isinstance(a, (int, str)):
                out |= free_vars(a)
        return out
    return set()


def depth(f: Formula) -> int:
    if isinstance(f, (Ex, AllQ)):
        return 1 + depth(f.body)
    if isinstance(f, (Not, Diamond, Box, Pref, KBounded)):
        return 1 + depth(f.arg)
    if isinstance(f, (Chop, And, Or, Implies, Iff)):
        return 1 + max(depth(f.left), depth(f.right))
    return 1


# ---------------------------------------------------------------------------
# desugaring


def desugar(f: Formula) -> Formula:
    """Rewrite surface constructs into the core variants.

    Propositional ``=>``/``<=>`` are kept (they are part of the propositional
    syntax). ``Call`` and symbolic constants must be resolved by ``expand``
    first.
    """
    if isinstance(f, (Point, AllButLast, All, Unit, TrueF)):
        return f
    if isinstance(f, (SLen, SCount, SDur)):
        if isinstance(f.c, SymConst):
            raise ValueError(f"unresolved constant {_const_text(f.c)!r}")
        return f
    if isinstance(f, FalseF):
        return Not(TrueF())
    if isinstance(f, Pt):
        return Point(PTrue())
    if isinstance(f, Ext):
        return Not(Point(PTrue()))
    if isinstance(f, Not):
        return Not(desugar(f.arg))
    if isinstance(f, Chop):
        return Chop(desugar(f.left), desugar(f.right))
    if isinstance(f, And):
        return And(desugar(f.left), desugar(f.right))
    if isinstance(f, Or):
        return Or(desugar(f.left), desugar(f.right))
    if isinstance(f, Implies):
        return Or(Not(desugar(f.left)), desugar(f.right))
    if isinstance(f, Iff):
        a, b = desugar(f.left), desugar(f.right)
        return Or(And(a, b), And(Not(a), Not(b)))
    if isinstance(f, Ex):
        return Ex(f.var, desugar(f.body))
    if isinstance(f, AllQ):
        return AllQ(f.var, desugar(f.body))
    if isinstance(f, Diamond):
        return Chop(TrueF(), Chop(desugar(f.arg), TrueF()))
    if isinstance(f, Box):
        return Not(Chop(TrueF(), Chop(Not(desugar(f.arg)), TrueF())))
    if isinstance(f, Pref):
        return Not(Chop(Not(desugar(f.arg)), TrueF()))
    if isinstance(f, EP):
        return Chop(TrueF(), Point(f.prop))
    if isinstance(f, KBounded):
        if isinstance(f.n, SymConst):
            raise ValueError(f"unresolved constant {_const_text(f.n)!r}")
        d = desugar(f.arg)
        n = f.n
        short = Or(Not(SLen("<", n)), d)
        window = Or(
            Not(Chop(TrueF(), SLen("=", n))),
            Chop(TrueF(), And(SLen("=", n), d)),
        )
        return And(short, window)
    if isinstance(f, Call):
        raise ValueError(f"unexpanded call {f.name!r}")
    raise TypeError(f"not a formula: {f!r}")


def kbounded(d: Formula, n: int) -> Formula:
    return KBounded(d, n)
