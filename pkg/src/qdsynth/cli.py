"""Command-line front end.

Specifications are given either as a QSF file or as a built-in case study
written ``arbiter:N,K,I`` or ``minepump:W,EPS,ZETA,KAPPA[,WINDOW]``.

QSF grammar::

    file        := ['#qsf' STRING] block*
    block       := 'interface' '{' decl* '}'
                 | 'definitions' '{' ('dc' NAME '(' params ')' '{' formula [';'] '}')* '}'
                 | 'indefinitions' '{' (NAME ':' formula ';')* '}'
                 | ('hardreq' | 'softreq') '{' ['useind' NAME (',' NAME)* ';'] (formula ';')* '}'
    decl        := ('input' | 'output') ['monitor'] NAME (',' NAME)* ';'
                 | 'constant' NAME '=' INT (',' NAME '=' INT)* ';'

``//`` starts a comment that runs to the end of the line.

Exit codes: 0 success, 1 other error, 2 parse error, 3 resource limit,
4 unrealizable, 5 interface mismatch.
"""
from __future__ import annotations

import argparse
import os
import re
import sys

import numpy as np

from . import dfa as D
from . import semantics
from .analyze import (
    build_dtmc, export_mrmc, long_run_value, monte_carlo_value, must_dominance, read_trace,
    simulate, write_trace,
)
from .casestudies import arbiter, arbiter_qsf, minepump, minepump_qsf
from .compile import Compiler, UnknownVariable, compile_formula
from .formula import free_vars
from .parser import ExpandError, ParseError, expand, expand_formula, parse_formula, parse_spec
from .robust import CRITERIA, Criterion, RobustSpec, lattice_pairs, lattice_check, lower
from .synth import (
    Controller, IoSignature, SignatureMismatch, SynthParams, Unrealizable, det_by_order,
    load_supervisor, mphos, mps,
)

EXIT_OTHER, EXIT_PARSE, EXIT_RESOURCE, EXIT_UNREAL, EXIT_MISMATCH = 1, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, msg: str, code: int = EXIT_OTHER):
        super().__init__(msg)
        self.code = code


# ---------------------------------------------------------------------------
# loading specifications


_BUILTIN = re.compile(r"^(arbiter|minepump):([0-9,\s]+)$")


def _builtin(text: str):
    m = _BUILTIN.match(text.strip())
    if not m:
        return None
    nums = [int(x) for x in m.group(2).split(",") if x.strip()]
    if m.group(1) == "arbiter":
        if len(nums) != 3:
            raise CliError("arbiter takes N,K,I", EXIT_PARSE)
        return arbiter(*nums)
    if len(nums) not in (4, 5):
        raise CliError("minepump takes W,EPS,ZETA,KAPPA[,WINDOW]", EXIT_PARSE)
    return minepump(*nums)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from exc


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


class Problem:
    """Hard and soft requirements with their interface, plus the commitment if known."""

    def __init__(self, inputs, outputs, hard, soft, commitment=None):
        self.io = IoSignature(inputs, outputs)
        self.hard = hard
        self.soft = soft
        self.commitment = commitment if commitment is not None else soft


def _robust_from_qsf(spec, criterion: Criterion) -> Problem:
    missing = [w for w in ("A", "C") if w not in spec.indicator_defs]
    if missing:
        raise CliError("--criterion needs indicators A (assumption) and C (commitment) in the file",
                       EXIT_MISMATCH)
    assume = expand_formula(spec.indicator_defs["A"], spec)
    commit = expand_formula(spec.indicator_defs["C"], spec)
    outputs = tuple(v for v in spec.outputs if v not in ("A", "C"))
    low = lower(RobustSpec(assume, commit, criterion, tuple(spec.inputs), outputs))
    return Problem(low.inputs, low.outputs, low.hard, low.soft, commit)


def load_problem(source: str, criterion: Criterion | None) -> Problem:
    cs = _builtin(source)
    if cs is not None:
        if criterion is None:
            raise CliError("a built-in case study needs --criterion")
        low = lower(cs.robust(criterion))
        return Problem(low.inputs, low.outputs, low.hard, low.soft, cs.commitment)
    spec = parse_spec(_read(source))
    if criterion is not None:
        return _robust_from_qsf(spec, criterion)
    ex = expand(spec)
    commit = None
    if "C" in spec.indicator_defs:
        commit = expand_formula(spec.indicator_defs["C"], spec)
    return Problem(ex.inputs, ex.outputs, ex.hard, ex.soft, commit)


def load_property(text: str, vars) -> D.Dfa:
    """A property given as a built-in case study (its commitment), a QSF file or formula text."""
    cs = _builtin(text)
    if cs is not None:
        f = cs.commitment
    elif text.endswith(".qsf") and os.path.exists(text):
        f = load_problem(text, None).commitment
    else:
        f = parse_formula(text)
    unknown = free_vars(f) - set(vars)
    if unknown:
        raise CliError(f"property mentions unknown variable(s): {', '.join(sorted(unknown))}",
                       EXIT_MISMATCH)
    # over its own support, so supervisors with extra outputs can share it
    return compile_formula(f, [v for v in vars if v in free_vars(f)])


def _criterion(args) -> Criterion | None:
    if args.criterion is None:
        return None
    k = args.k if args.k is not None else 1
    b = args.b if args.b is not None else 3
    try:
        return Criterion.make(args.criterion, k, b)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _split(text: str | None) -> list[str]:
    return [x.strip() for x in (text or "").split(",") if x.strip()]


# ---------------------------------------------------------------------------
# commands


def cmd_compile(args):
    if args.formula is not None:
        vars = _split(args.vars)
        f = parse_formula(args.formula)
        extra = sorted(set(free_vars(f)) - set(vars))
        a = compile_formula(f, vars + extra)
    else:
        if args.spec is None:
            raise CliError("give a QSF file or --formula")
        p = load_problem(args.spec, _criterion(args))
        a = compile_formula(p.hard if args.part == "hard" else p.soft, p.io.vars)
    text = D.to_dot(a) if args.emit == "dot" else D.dump(a)
    _write(args.out, text)
    print(f"states {a.n_states}", file=sys.stderr if args.out in (None, "-") else sys.stdout)


def cmd_synth(args):
    crit = _criterion(args)
    p = load_problem(args.spec, crit)
    comp = Compiler(p.io.vars)
    hard = compile_formula(p.hard, p.io.vars, comp)
    label = str(crit) if crit is not None else "hard requirement"
    try:
        sup = mps(hard, p.io)
    except Unrealizable as exc:
        raise CliError(f"Unrealizable: {label}", EXIT_UNREAL) from exc
    params = SynthParams(args.horizon, args.discount, args.delta)
    if args.stage in ("mphos", "controller") and not (args.stage == "controller" and args.base == "mps"):
        sup = mphos(sup, compile_formula(p.soft, p.io.vars, comp), params)
    if args.stage == "controller":
        order = _split(args.order) or list(p.io.outputs)
        try:
            sup = det_by_order(sup, order)
        except SignatureMismatch as exc:
            raise CliError(str(exc), EXIT_MISMATCH) from exc
    _write(args.out, sup.dump())
    msg = f"realizable {label}\nstates {sup.n_states}\n"
    (sys.stderr if args.out in (None, "-") else sys.stdout).write(msg)


def _load_sup(path):
    try:
        return load_supervisor(_read(path))
    except ValueError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from exc


def _word_text(word, vars) -> str:
    return " ".join(",".join(v for v in vars if v in letter) or "-" for letter in word)


def cmd_dominance(args):
    s1, s2 = _load_sup(args.left), _load_sup(args.right)
    if set(s1.io.inputs) != set(s2.io.inputs):
        raise CliError("supervisors have different inputs", EXIT_MISMATCH)
    commit = load_property(args.commit, s1.io.vars)
    r = must_dominance(s1, s2, commit)
    print(r.verdict)
    if r.only_left is not None:
        print("only-left\t" + _word_text(r.only_left, s1.io.inputs))
    if r.only_right is not None:
        print("only-right\t" + _word_text(r.only_right, s1.io.inputs))


def _load_controller(path) -> Controller:
    sup = _load_sup(path)
    if not isinstance(sup, Controller):
        if not sup.is_deterministic():
            raise CliError(f"{path} is not a controller")
        sup = Controller(sup.dfa, sup.io)
    return sup


def cmd_expect(args):
    cnt = _load_controller(args.controller)
    prop = load_property(args.prop, cnt.io.vars)
    m = build_dtmc(cnt, prop)
    print(f"{long_run_value(m):.6f}")
    if args.mc:
        print(f"monte-carlo {monte_carlo_value(m, args.mc, np.random.default_rng(args.seed)):.6f}")
    if args.mrmc:
        tra, lab = export_mrmc(m)
        _write(args.mrmc + ".tra", tra)
        _write(args.mrmc + ".lab", lab)


def cmd_simulate(args):
    cnt = _load_controller(args.controller)
    rows = read_trace(_read(args.trace))
    props = []
    for item in args.prop or []:
        name, sep, text = item.partition("=")
        if not sep:
            raise CliError("--prop takes NAME=FORMULA")
        props.append((name.strip(), load_property(text, cnt.io.vars)))
    try:
        out = simulate(cnt, rows, props)
    except SignatureMismatch as exc:
        raise CliError(str(exc), EXIT_MISMATCH) from exc
    cols = list(cnt.io.inputs) + list(cnt.io.outputs) + [n for n, _ in props]
    _write(args.out, write_trace(out, cols))


def cmd_lattice(args):
    print("left\tright\tverdict\twitness")
    for e in lattice_check(lattice_pairs(), args.k, args.b):
        w = "" if e.witness is None else _word_text(e.witness, ("A",))
        print(f"{e.left}\t{e.right}\t{'VALID' if e.valid else 'INVALID'}\t{w}")


def cmd_gen(args):
    crit = _criterion(args) or Criterion("BeCurrentlyCorrect")
    nums = args.params
    if args.study == "arbiter":
        if len(nums) != 3:
            raise CliError("arbiter takes N K I")
        text = arbiter_qsf(*nums, crit)
    else:
        if len(nums) not in (4, 5):
            raise CliError("minepump takes W EPS ZETA KAPPA [WINDOW]")
        text = minepump_qsf(*nums[:4], crit, window=nums[4] if len(nums) == 5 else None)
    _write(args.out, text)


def parse_word(text: str, vars) -> list[frozenset]:
    """Positions separated by whitespace, each a comma list of true variables or '-'."""
    word = []
    for pos in text.split():
        names = frozenset() if pos == "-" else frozenset(_split(pos))
        unknown = names - set(vars)
        if unknown:
            raise CliError(f"unknown variable(s) in word: {', '.join(sorted(unknown))}", EXIT_MISMATCH)
        word.append(names)
    if not word:
        raise CliError("words are nonempty", EXIT_PARSE)
    return word


def cmd_eval(args):
    f = parse_formula(args.formula)
    vars = sorted(set(free_vars(f)) | set(_split(args.vars)))
    w = semantics.make_word(parse_word(args.word, vars))
    b = 0 if args.b is None else args.b
    e = len(w) - 1 if args.e is None else args.e
    if not 0 <= b <= e < len(w):
        raise CliError("need 0 <= b <= e < length")
    print("true" if semantics.eval(w, b, e, f) else "false")


# ---------------------------------------------------------------------------
# argument parsing


def _add_criterion(p):
    p.add_argument("--criterion", choices=CRITERIA)
    p.add_argument("--k", type=int, help="error budget K (default 1)")
    p.add_argument("--b", type=int, help="recovery/window bound B (default 3)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdsynth", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a formula or specification to a minimal DFA")
    p.add_argument("spec", nargs="?")
    p.add_argument("--formula")
    p.add_argument("--vars", help="comma-separated alphabet (formula mode)")
    p.add_argument("--part", choices=("hard", "soft"), default="hard")
    p.add_argument("--emit", choices=("dump", "dot"), default="dump")
    p.add_argument("--out")
    _add_criterion(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("synth", help="synthesize a supervisor or controller")
    p.add_argument("spec")
    _add_criterion(p)
    p.add_argument("--horizon", type=int, default=50)
    p.add_argument("--discount", type=float, default=0.9)
    p.add_argument("--delta", type=float, default=1e-4)
    p.add_argument("--order", help="output literals, most preferred first, e.g. a1,!a2")
    p.add_argument("--stage", choices=("mps", "mphos", "controller"), default="controller")
    p.add_argument("--base", choices=("mps", "mphos"), default="mphos",
                   help="supervisor the controller is carved from")
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dominance", help="compare two supervisors by must dominance")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--commit", required=True, help="formula, QSF file or built-in case study")
    p.set_defaults(func=cmd_dominance)

    p = sub.add_parser("expect", help="long-run expected value of a property")
    p.add_argument("controller")
    p.add_argument("--prop", required=True, help="formula, QSF file or built-in case study")
    p.add_argument("--mc", type=int, default=0, help="also run a Monte-Carlo estimate of this many steps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mrmc", help="write PREFIX.tra and PREFIX.lab")
    p.set_defaults(func=cmd_expect)

    p = sub.add_parser("simulate", help="run a controller on a CSV input trace")
    p.add_argument("controller")
    p.add_argument("--trace", required=True)
    p.add_argument("--prop", action="append", help="NAME=FORMULA verdict column (repeatable)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lattice", help="check the implication order of the robustness criteria")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--b", type=int, default=3)
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("gen", help="emit a case-study QSF file")
    p.add_argument("study", choices=("arbiter", "minepump"))
    p.add_argument("params", type=int, nargs="+")
    _add_criterion(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("eval", help="evaluate a formula on a word with the reference semantics")
    p.add_argument("--formula", required=True)
    p.add_argument("--word", required=True, help="e.g. 'p p,q -' (one group per position)")
    p.add_argument("--vars", help="extra alphabet variables")
    p.add_argument("--b", type=int)
    p.add_argument("--e", type=int)
    p.set_defaults(func=cmd_eval)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ParseError, ExpandError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except D.ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (SignatureMismatch, UnknownVariable, D.AlphabetMismatch) as exc:
        print(f"interface mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except Unrealizable as exc:
        print(f"Unrealizable: {exc}", file=sys.stderr)
        return EXIT_UNREAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER
    return 0


if __name__ == "__main__":
    sys.exit(main())
