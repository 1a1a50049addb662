"""Parsers for formulas and QSF specification files, plus macro expansion.

Operator precedence, tightest first: prefix ``!``/``<>``/``[]``, chop ``^``
(right associative), ``&&``, ``||``, ``=>`` (right associative), ``<=>``.
``ex p. D`` and ``all p. D`` extend as far right as possible.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .formula import (
    CMP_OPS, EP, All, AllButLast, AllQ, And, Box, Call, Chop, Diamond, Ex, Ext, FalseF,
    Iff, Implies, KBounded, Not, Or, PAnd, PFalse, PIff, PImplies, PNot, POr, PTrue, Point,
    Pref, Pt, SCount, SDur, SLen, SymConst, TrueF, Unit, Var, conj, free_vars,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + message)


class ExpandError(ValueError):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=>|=>|<=|>=|<>|&&|\|\||\[\[|\]\]|\[\]|[<>=\[\](){}^!.,;:+\-\#])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"true", "false", "ex", "all", "slen", "scount", "sdur", "pt", "ext"}


@dataclass
class Token:
    kind: str  # 'int', 'ident', 'string', 'op', 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str, line0: int = 1, col0: int = 1) -> list[Token]:
    out = []
    pos, line, col = 0, line0, col0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            out.append(Token(kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def expect_ident(self) -> str:
        t = self.tok
        if t.kind != "ident":
            self.error(f"expected identifier, found {t.text or 'end of input'!r}")
        self.advance()
        return t.text

    def error(self, msg: str):
        raise ParseError(msg, self.tok.line, self.tok.col)

    # -- propositional formulas
    def prop(self):
        left = self.prop_imp()
        if self.at("<=>"):
            self.advance()
            return PIff(left, self.prop())
        return left

    def prop_imp(self):
        left = self.prop_or()
        if self.at("=>"):
            self.advance()
            return PImplies(left, self.prop_imp())
        return left

    def prop_or(self):
        left = self.prop_and()
        while self.at("||"):
            self.advance()
            left = POr(left, self.prop_and())
        return left

    def prop_and(self):
        left = self.prop_unary()
        while self.at("&&"):
            self.advance()
            left = PAnd(left, self.prop_unary())
        return left

    def prop_unary(self):
        t = self.tok
        if self.at("!"):
            self.advance()
            return PNot(self.prop_unary())
        if self.at("("):
            self.advance()
            p = self.prop()
            self.expect(")")
            return p
        if t.kind == "ident":
            self.advance()
            if t.text == "true":
                return PTrue()
            if t.text == "false":
                return PFalse()
            if t.text in _KEYWORDS:
                raise ParseError(f"keyword {t.text!r} in propositional position", t.line, t.col)
            return Var(t.text)
        self.error(f"expected proposition, found {t.text or 'end of input'!r}")

    # -- constants
    def const(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return int(t.text)
        if self.at("-") and self.peek().kind == "int":
            self.error("negative constant")
        if t.kind == "ident" and t.text not in _KEYWORDS:
            self.advance()
            if self.at("-", "+") and self.peek().kind == "int":
                sign = -1 if self.advance().text == "-" else 1
                return SymConst(t.text, sign * int(self.advance().text))
            return SymConst(t.text)
        self.error(f"expected constant, found {t.text or 'end of input'!r}")

    def cmp_op(self) -> str:
        if self.tok.kind == "op" and self.tok.text in CMP_OPS:
            return self.advance().text
        self.error(f"expected comparison operator, found {self.tok.text or 'end of input'!r}")

    # -- formulas
    def formula(self):
        left = self.f_imp()
        if self.at("<=>"):
            self.advance()
            return Iff(left, self.formula())
        return left

    def f_imp(self):
        left = self.f_or()
        if self.at("=>"):
            self.advance()
            return Implies(left, self.f_imp())
        return left

    def f_or(self):
        left = self.f_and()
        while self.at("||"):
            self.advance()
            left = Or(left, self.f_and())
        return left

    def f_and(self):
        left = self.f_chop()
        while self.at("&&"):
            self.advance()
            left = And(left, self.f_chop())
        return left

    def f_chop(self):
        left = self.f_unary()
        if self.at("^"):
            self.advance()
            return Chop(left, self.f_chop())
        return left

    def f_unary(self):
        t = self.tok
        if t.kind == "op":
            if t.text == "!":
                self.advance()
                return Not(self.f_unary())
            if t.text == "<>":
                self.advance()
                return Diamond(self.f_unary())
            if t.text == "[]":
                self.advance()
                return Box(self.f_unary())
            if t.text == "(":
                self.advance()
                f = self.formula()
                self.expect(")")
                return f
            if t.text == "<":
                self.advance()
                p = self.prop()
                self.expect(">")
                return Point(p)
            if t.text == "[[":
                self.advance()
                p = self.prop()
                self.expect("]]")
                return All(p)
            if t.text == "[":
                self.advance()
                p = self.prop()
                self.expect("]")
                return AllButLast(p)
            if t.text == "{" and self.peek().text == "{":
                self.advance()
                self.advance()
                p = self.prop()
                self.expect("}")
                self.expect("}")
                return Unit(p)
        if t.kind == "ident":
            return self.f_ident()
        self.error(f"expected formula, found {t.text or 'end of input'!r}")

    def f_ident(self):
        t = self.advance()
        name = t.text
        if name == "true":
            return TrueF()
        if name == "false":
            return FalseF()
        if name == "pt":
            return Pt()
        if name == "ext":
            return Ext()
        if name in ("ex", "all"):
            var = self.expect_ident()
            self.expect(".")
            body = self.formula()
            return Ex(var, body) if name == "ex" else AllQ(var, body)
        if name == "slen":
            op = self.cmp_op()
            return SLen(op, self.const())
        if name in ("scount", "sdur"):
            p = self.prop_unary()
            op = self.cmp_op()
            c = self.const()
            return SCount(p, op, c) if name == "scount" else SDur(p, op, c)
        if self.at("("):
            return self.call(name, t)
        return EP(Var(name))

    def call(self, name: str, t: Token):
        self.expect("(")
        if name == "EP":
            phi = self.prop()
            self.expect(")")
            return EP(phi)
        args = []
        if not self.at(")"):
            while True:
                args.append(self.call_arg())
                if self.at(","):
                    self.advance()
                    continue
                break
        self.expect(")")
        if name == "pref":
            if len(args) != 1:
                raise ParseError("pref takes one argument", t.line, t.col)
            return Pref(_as_formula(args[0]))
        if name == "KBOUNDED":
            if len(args) != 2:
                raise ParseError("KBOUNDED takes two arguments", t.line, t.col)
            n = args[1]
            if isinstance(n, str):
                n = SymConst(n)
            elif isinstance(n, EP) and isinstance(n.prop, Var):
                n = SymConst(n.prop.name)
            elif not isinstance(n, (int, SymConst)):
                raise ParseError("KBOUNDED window must be a constant", t.line, t.col)
            return KBounded(_as_formula(args[0]), n)
        return Call(name, tuple(args))

    def call_arg(self):
        t = self.tok
        nxt = self.peek()
        if t.kind == "int" and nxt.text in (",", ")"):
            self.advance()
            return int(t.text)
        if t.kind == "ident" and t.text not in _KEYWORDS and nxt.text in (",", ")"):
            self.advance()
            return t.text
        if t.kind == "ident" and t.text not in _KEYWORDS and nxt.text in ("-", "+") \
                and self.peek(2).kind == "int" and self.peek(3).text in (",", ")"):
            return self.const()
        return self.formula()


def _as_formula(a):
    if isinstance(a, str):
        return EP(Var(a))
    if isinstance(a, int):
        raise ParseError(f"integer {a} where a formula is expected")
    return a


def parse_prop(text: str):
    p = _Parser(tokenize(text))
    out = p.prop()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    return out


def parse_formula(text: str, env=None):
    """Parse a formula; if ``env`` is given, every free variable must be in it."""
    p = _Parser(tokenize(text))
    f = p.formula()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    if env is not None:
        unknown = sorted(free_vars(f) - set(env))
        if unknown:
            raise ParseError(f"unknown variable(s): {', '.join(unknown)}")
    return f


# ---------------------------------------------------------------------------
# specification files


@dataclass
class Definition:
    params: tuple
    body: object


@dataclass
class SpecFile:
    name: str = ""
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    definitions: dict = field(default_factory=dict)
    indicator_defs: dict = field(default_factory=dict)
    hard_req: object = None
    soft_req: object = None
    hard_useind: list = field(default_factory=list)
    soft_useind: list = field(default_factory=list)


class _SpecParser(_Parser):
    def __init__(self, tokens):
        super().__init__(tokens)
        self.spec = SpecFile()
        self.hard = []
        self.soft = []

    def declare(self, name: str, t: Token):
        s = self.spec
        if name in s.inputs or name in s.outputs or name in s.constants:
            raise ParseError(f"duplicate declaration of {name!r}", t.line, t.col)

    def run(self) -> SpecFile:
        if self.at("#"):
            self.advance()
            kw = self.expect_ident()
            if kw != "qsf":
                self.error("expected '#qsf'")
            if self.tok.kind != "string":
                self.error("expected quoted specification name")
            self.spec.name = self.advance().text[1:-1]
        while self.tok.kind != "eof":
            t = self.tok
            kw = self.expect_ident()
            self.expect("{")
            if kw == "interface":
                self.interface()
            elif kw == "definitions":
                self.definitions()
            elif kw == "indefinitions":
                self.indefinitions()
            elif kw == "hardreq":
                self.requirement(self.hard, self.spec.hard_useind)
            elif kw == "softreq":
                self.requirement(self.soft, self.spec.soft_useind)
            else:
                raise ParseError(f"unknown block {kw!r}", t.line, t.col)
            self.expect("}")
        s = self.spec
        s.hard_req = conj(*self.hard) if self.hard else TrueF()
        s.soft_req = conj(*self.soft) if self.soft else TrueF()
        self.check(s)
        return s

    def interface(self):
        while not self.at("}"):
            t = self.tok
            kw = self.expect_ident()
            if kw in ("input", "output"):
                while True:
                    nt = self.tok
                    name = self.expect_ident()
                    self.declare(name, nt)
                    (self.spec.inputs if kw == "input" else self.spec.outputs).append(name)
                    if self.at("monitor"):
                        self.advance()
                        self.expect_ident()
                    if not self.at(","):
                        break
                    self.advance()
            elif kw == "constant":
                while True:
                    nt = self.tok
                    name = self.expect_ident()
                    self.declare(name, nt)
                    self.expect("=")
                    if self.tok.kind != "int":
                        self.error("constant value must be a non-negative integer")
                    self.spec.constants[name] = int(self.advance().text)
                    if not self.at(","):
                        break
                    self.advance()
            else:
                raise ParseError(f"unknown interface declaration {kw!r}", t.line, t.col)
            self.end_statement()

    def end_statement(self):
        if self.at(";"):
            self.advance()
        elif not self.at("}"):
            self.error(f"expected ';', found {self.tok.text or 'end of input'!r}")

    def definitions(self):
        while not self.at("}"):
            t = self.tok
            if self.expect_ident() != "dc":
                raise ParseError("expected 'dc'", t.line, t.col)
            nt = self.tok
            name = self.expect_ident()
            if name in self.spec.definitions:
                raise ParseError(f"duplicate definition {name!r}", nt.line, nt.col)
            self.expect("(")
            params = []
            while not self.at(")"):
                params.append(self.expect_ident())
                if self.at(","):
                    self.advance()
            self.expect(")")
            self.expect("{")
            body = []
            while not self.at("}"):
                body.append(self.formula())
                self.end_statement()
            self.expect("}")
            if len(set(params)) != len(params):
                raise ParseError(f"repeated parameter in {name!r}", nt.line, nt.col)
            self.spec.definitions[name] = Definition(tuple(params), conj(*body))

    def indefinitions(self):
        while not self.at("}"):
            nt = self.tok
            name = self.expect_ident()
            if name in self.spec.indicator_defs:
                raise ParseError(f"duplicate indicator {name!r}", nt.line, nt.col)
            self.expect(":")
            self.spec.indicator_defs[name] = self.formula()
            self.end_statement()

    def requirement(self, target: list, useind: list):
        while not self.at("}"):
            if self.at("useind"):
                self.advance()
                while True:
                    useind.append(self.expect_ident())
                    if not self.at(","):
                        break
                    self.advance()
            else:
                target.append(self.formula())
            self.end_statement()

    def check(self, s: SpecFile):
        for name in s.indicator_defs:
            if name not in s.outputs:
                raise ParseError(f"indicator {name!r} must be declared as an output")
        for name in s.hard_useind + s.soft_useind:
            if name not in s.indicator_defs:
                raise ParseError(f"useind of undefined indicator {name!r}")
        declared = set(s.inputs) | set(s.outputs)
        for d in [s.hard_req, s.soft_req, *s.indicator_defs.values()]:
            unknown = free_vars(d) - declared - set(s.constants)
            if unknown:
                raise ParseError(f"undeclared variable(s): {', '.join(sorted(unknown))}")


def parse_spec(text: str) -> SpecFile:
    return _SpecParser(tokenize(text)).run()


# ---------------------------------------------------------------------------
# expansion


@dataclass
class ExpandedSpec:
    inputs: list
    outputs: list
    hard: object
    soft: object


def _rename_prop(p, sub):
    if isinstance(p, Var):
        v = sub.get(p.name)
        if v is None:
            return p
        if isinstance(v, str):
            return Var(v)
        if isinstance(v, EP):
            return v.prop
        raise ExpandError(f"parameter {p.name!r} used as a proposition")
    if isinstance(p, PNot):
        return PNot(_rename_prop(p.arg, sub))
    if isinstance(p, (PAnd, POr, PImplies, PIff)):
        return type(p)(_rename_prop(p.left, sub), _rename_prop(p.right, sub))
    return p


class _Expander:
    def __init__(self, spec: SpecFile):
        self.spec = spec
        self.stack: list[str] = []

    def const(self, c, sub):
        if isinstance(c, int):
            return c
        base = sub.get(c.name, self.spec.constants.get(c.name))
        if isinstance(base, EP) and isinstance(base.prop, Var):
            base = self.spec.constants.get(base.prop.name)
        if isinstance(base, str):
            base = self.spec.constants.get(base)
        if not isinstance(base, int):
            raise ExpandError(f"unknown constant {c.name!r}")
        v = base + c.offset
        if v < 0:
            raise ExpandError(f"constant {c.name}{c.offset:+d} is negative")
        return v

    def arg(self, a, sub):
        # resolve a call argument in the caller's scope
        if isinstance(a, int):
            return a
        if isinstance(a, str):
            if a in sub:
                return sub[a]
            if a in self.spec.constants:
                return self.spec.constants[a]
            return a
        if isinstance(a, SymConst):
            return self.const(a, sub)
        return self.go(a, sub)

    def go(self, f, sub):
        r = lambda g: self.go(g, sub)  # noqa: E731
        if isinstance(f, (Point, AllButLast, All, Unit)):
            return type(f)(_rename_prop(f.prop, sub))
        if isinstance(f, EP):
            if isinstance(f.prop, Var) and f.prop.name in sub:
                v = sub[f.prop.name]
                if isinstance(v, str):
                    return EP(Var(v))
                if isinstance(v, int):
                    raise ExpandError(f"constant parameter {f.prop.name!r} used as a formula")
                return v
            return EP(_rename_prop(f.prop, sub))
        if isinstance(f, SLen):
            return SLen(f.op, self.const(f.c, sub))
        if isinstance(f, (SCount, SDur)):
            return type(f)(_rename_prop(f.prop, sub), f.op, self.const(f.c, sub))
        if isinstance(f, KBounded):
            return KBounded(r(f.arg), self.const(f.n, sub))
        if isinstance(f, (Not, Diamond, Box, Pref)):
            return type(f)(r(f.arg))
        if isinstance(f, (Chop, And, Or, Implies, Iff)):
            return type(f)(r(f.left), r(f.right))
        if isinstance(f, (Ex, AllQ)):
            inner = {k: v for k, v in sub.items() if k != f.var}
            return type(f)(f.var, self.go(f.body, inner))
        if isinstance(f, Call):
            return self.call(f, sub)
        return f

    def call(self, f: Call, sub):
        args = [self.arg(a, sub) for a in f.args]
        d = self.spec.definitions.get(f.name)
        if d is None:
            from .robust import builtin_macro

            out = builtin_macro(f.name, args)
            if out is None:
                raise ExpandError(f"unknown definition {f.name!r}")
            return self.go(out, {})
        if f.name in self.stack:
            raise ExpandError("recursive definition: " + " -> ".join(self.stack + [f.name]))
        if len(args) != len(d.params):
            raise ExpandError(
                f"{f.name!r} expects {len(d.params)} argument(s), got {len(args)}")
        self.stack.append(f.name)
        try:
            return self.go(d.body, dict(zip(d.params, args)))
        finally:
            self.stack.pop()


def expand_formula(f, spec: SpecFile | None = None):
    """Inline definitions and constants in a single formula."""
    return _Expander(spec or SpecFile()).go(f, {})


def expand(spec: SpecFile) -> ExpandedSpec:
    """Inline calls and constants and turn ``useind`` imports into cascades."""
    from .robust import cascade

    ex = _Expander(spec)
    inds = {w: ex.go(d, {}) for w, d in spec.indicator_defs.items()}
    hard = ex.go(spec.hard_req, {})
    soft = ex.go(spec.soft_req, {})
    hard = cascade(hard, [(inds[w], w) for w in dict.fromkeys(spec.hard_useind)], check=False)
    soft = cascade(soft, [(inds[w], w) for w in dict.fromkeys(spec.soft_useind)], check=False)
    declared = set(spec.inputs) | set(spec.outputs)
    for d in (hard, soft):
        unknown = free_vars(d) - declared
        if unknown:
            raise ExpandError(f"undeclared variable(s): {', '.join(sorted(unknown))}")
    return ExpandedSpec(list(spec.inputs), list(spec.outputs), hard, soft)
