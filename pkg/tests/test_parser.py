import random

import pytest

from helpers import random_formula
from qdsynth.formula import (
    EP, All, And, Box, Chop, Diamond, Ex, Iff, Implies, KBounded, Not, Or, PAnd, Pref, PImplies,
    PNot, Point, SCount, SDur, SLen, TrueF, Unit, Var, free_vars, to_text,
)
from qdsynth.parser import ExpandError, ParseError, expand, parse_formula, parse_prop, parse_spec

p, q, r = Var("p"), Var("q"), Var("r")


def test_round_trip_random():
    rng = random.Random(7)
    for _ in range(300):
        f = random_formula(rng, ["p", "q", "r"], 4)
        assert parse_formula(to_text(f)) == f


def test_chop_binds_tighter_than_and_and_is_right_assoc():
    f = parse_formula("[[p]] ^ <q> ^ [r] && slen = 2")
    assert f == And(Chop(All(p), Chop(Point(q), parse_formula("[r]"))), SLen("=", 2))


def test_implication_is_right_assoc_and_iff_loosest():
    f = parse_formula("a => b => c <=> d")
    a, b, c, d = (EP(Var(x)) for x in "abcd")
    assert f == Iff(Implies(a, Implies(b, c)), d)


def test_or_looser_than_and():
    f = parse_formula("a || b && c")
    assert f == Or(EP(Var("a")), And(EP(Var("b")), EP(Var("c"))))


def test_prefix_operators():
    f = parse_formula("!<>[]{{p}}")
    assert f == Not(Diamond(Box(Unit(p))))


def test_quantifier_extends_right():
    f = parse_formula("ex p. [[p]] ^ <q> && true")
    assert isinstance(f, Ex) and f.var == "p"
    assert f.body == And(Chop(All(p), Point(q)), TrueF())


def test_counting_terms():
    assert parse_formula("scount p >= 2") == SCount(p, ">=", 2)
    assert parse_formula("sdur (p && q) < 1") == SDur(PAnd(p, q), "<", 1)


def test_bare_proposition_is_end_point():
    assert parse_formula("p") == EP(p)
    assert parse_formula("EP(p => !q)") == EP(PImplies(p, PNot(q)))


def test_kbounded_and_comments():
    f = parse_formula("KBOUNDED([]([[p]] => slen < 3), 4) // trailing comment")
    assert f == KBounded(Box(Implies(All(p), SLen("<", 3))), 4)


def test_parse_prop():
    assert parse_prop("p && !q || r") == parse_prop("(p && !q) || r")


def test_free_vars_respects_binding():
    assert free_vars(parse_formula("ex p. [[p && q]]")) == {"q"}


@pytest.mark.parametrize("text", ["[[p", "p &&", "slen < ", "ex . p", "<p> ^", "scount p"])
def test_malformed_formula(text):
    with pytest.raises(ParseError):
        parse_formula(text)


def test_error_position():
    with pytest.raises(ParseError) as e:
        parse_formula("p &&\n  && q")
    assert e.value.line == 2


def test_undeclared_in_env():
    with pytest.raises(ParseError):
        parse_formula("[[p && z]]", env=["p"])


SPEC = """
#qsf "toy"
interface{
  input req;
  output ack, W;
  constant k = 2;
}
definitions{
  dc resp(r, a){ (true^([[r]] && slen = k-1)) => (true^(scount a > 0 && slen = k-1)); }
  dc never(a){ true^<!a> }
}
indefinitions{
  W : resp(req, ack);
}
hardreq{
  useind W;
  EP(W);
}
softreq{
  never(ack);
}
"""


def test_spec_file_and_expansion():
    spec = parse_spec(SPEC)
    assert spec.name == "toy"
    assert spec.inputs == ["req"] and spec.outputs == ["ack", "W"]
    assert spec.constants["k"] == 2
    ex = expand(spec)
    window = SLen("=", 1)
    body = Implies(Chop(TrueF(), And(All(Var("req")), window)),
                   Chop(TrueF(), And(SCount(Var("ack"), ">", 0), window)))
    assert ex.hard == And(EP(Var("W")), Pref(Iff(EP(Var("W")), body)))
    assert ex.soft == Chop(TrueF(), Point(PNot(Var("ack"))))


@pytest.mark.parametrize("text, exc", [
    ("interface{ input a; output a; }", ParseError),
    ("interface{ input a; } hardreq{ [[b]]; }", ParseError),
    ("interface{ input a; } definitions{ dc f(){ g(); } dc g(){ f(); } } hardreq{ f(); }", ExpandError),
    ("interface{ input a; } hardreq{ nothere(a); }", ExpandError),
    ("interface{ input a; } hardreq{ [[a]]", ParseError),
])
def test_spec_errors(text, exc):
    with pytest.raises(exc):
        expand(parse_spec(text))


def test_builtin_criterion_macro():
    spec = parse_spec("interface{ input a; output A; } hardreq{ ResCntInt(A, 1, 3); }")
    from qdsynth.robust import Criterion, criterion_formula

    assert expand(spec).hard == criterion_formula(Criterion("ResCntInt", 1, 3), "A")
