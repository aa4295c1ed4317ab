"""Command line driver.

Subcommands cover the pipeline end to end: ``parse`` and ``eval`` for the
operational side, ``check`` and ``ortho`` for the type system, ``unitary``
for matrix extraction, ``repl`` for interactive use, and ``corpus`` for
the bundled example table.  Exit status is 0 on success, 1 when the
analysis itself reports a failure (stuck term, ill-typed program, unit-map
violation, failing corpus row), and 2 for unusable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from typing import Optional

from .basis import Ortho
from .checker import CheckError, check, check_orthogonality
from .core import TermDist, phase_normalize, set_eps, single
from .corpus import format_rows, run_corpus
from .reduction import NormalForm, Stuck, evaluate
from .syntax import (
    ParseError,
    load_program,
    parse_term,
    parse_type,
    print_basis,
    print_term,
    print_type,
    render_scalar,
)
from .core import Lam
from .unitary import UnitaryError, check_unitary, uncurry2

ANALYSIS_FAILURE = 1
USAGE_ERROR = 2


def _fmt_phase(c: complex) -> str:
    neg, text = render_scalar(c)
    text = text or "1"
    return f"-{text}" if neg else text


def _complex_pair(c: complex) -> list[float]:
    return [c.real, c.imag]


def _environment(
    def_files: list[str],
) -> tuple[Optional[dict[str, Ortho]], dict[str, TermDist]]:
    if not def_files:
        return None, {}
    bases: dict[str, Ortho] = {}
    defs: dict[str, TermDist] = {}
    for path in def_files:
        prog = load_program(path)
        bases.update(prog.all_bases())
        defs.update(prog.defs)
    return bases, defs


# ---------------------------------------------------------------------------
# Subcommands.


def _cmd_parse(args, bases, defs) -> int:
    if args.type:
        text = print_type(parse_type(args.term, bases))
        payload = {"type": text}
    else:
        text = print_term(parse_term(args.term, bases, defs))
        payload = {"term": text}
    print(json.dumps(payload) if args.json else text)
    return 0


def _cmd_eval(args, bases, defs) -> int:
    d = parse_term(args.term, bases, defs)
    trace = evaluate(d, args.max_steps)
    steps = [
        {"rule": rule.value, "term": print_term(dist)}
        for dist, rule in trace.steps
    ]
    if isinstance(trace.final, NormalForm):
        nf = trace.final.dist
        if nf.is_zero():
            normalized, phase = nf, complex(1.0)
        else:
            normalized, phase = phase_normalize(nf)
        if args.json:
            payload = {
                "normal_form": print_term(normalized),
                "steps": trace.fuel_used,
                "phase": _complex_pair(phase),
            }
            if args.trace:
                payload["trace"] = steps
            print(json.dumps(payload))
        else:
            if args.trace:
                for k, s in enumerate(steps):
                    print(f"{k + 1:>4}. {s['rule']:<12} {s['term']}")
            print(f"normal form: {print_term(normalized)}")
            print(f"steps: {trace.fuel_used}")
            print(f"phase: {_fmt_phase(phase)}")
        return 0
    stuck: Stuck = trace.final
    at = (
        print_term(single(stuck.offending))
        if stuck.offending is not None
        else None
    )
    if args.json:
        payload = {
            "stuck": stuck.reason,
            "at": at,
            "steps": trace.fuel_used,
        }
        if args.trace:
            payload["trace"] = steps
        print(json.dumps(payload))
    else:
        if args.trace:
            for k, s in enumerate(steps):
                print(f"{k + 1:>4}. {s['rule']:<12} {s['term']}")
        print(f"stuck: {stuck.reason}")
        if at is not None:
            print(f"at: {at}")
        print(f"steps: {trace.fuel_used}")
    return ANALYSIS_FAILURE


def _cmd_check(args, bases, defs) -> int:
    d = parse_term(args.term, bases, defs)
    goal = parse_type(args.type_, bases)
    try:
        deriv = check({}, d, goal, args.max_steps)
    except CheckError as e:
        if args.json:
            print(json.dumps({"ok": False, "error": str(e)}))
        else:
            print(f"type error: {e}")
        return ANALYSIS_FAILURE
    if args.json:
        print(json.dumps({"ok": True, "rule": deriv.rule}))
    else:
        print(f"well-typed: {print_type(goal)}")
        print(f"rule: {deriv.rule}")
    return 0


def _cmd_ortho(args, bases, defs) -> int:
    left = parse_term(args.left, bases, defs)
    right = parse_term(args.right, bases, defs)
    goal = parse_type(args.type_, bases)
    ok = check_orthogonality(
        {}, {}, left, {}, right, goal, max_steps=args.max_steps
    )
    if args.json:
        print(json.dumps({"orthogonal": ok}))
    else:
        print("orthogonal" if ok else "not orthogonal")
    return 0 if ok else ANALYSIS_FAILURE


def _fmt_entry(z: complex) -> str:
    return f"{z.real:+.6f}{z.imag:+.6f}i"


def _auto_uncurry(d: TermDist) -> tuple[TermDist, Optional[str]]:
    """A curried two-argument abstraction with annotated binders is
    wrapped through uncurry2 so its matrix is taken over the product
    basis."""
    if len(d.entries) != 1:
        return d, None
    t, _ = d.entries[0]
    if not isinstance(t, Lam) or not isinstance(t.basis, Ortho):
        return d, None
    if len(t.body.entries) != 1:
        return d, None
    inner, _ = t.body.entries[0]
    if not isinstance(inner, Lam) or not isinstance(inner.basis, Ortho):
        return d, None
    wrapped = uncurry2(d, t.basis, inner.basis)
    note = f"{print_basis(t.basis)} x {print_basis(inner.basis)}"
    return wrapped, note


def _cmd_unitary(args, bases, defs) -> int:
    d = parse_term(args.term, bases, defs)
    d, uncurried = _auto_uncurry(d)
    try:
        report = check_unitary(d, max_steps=args.max_steps)
    except UnitaryError as e:
        if args.json:
            print(json.dumps({"error": str(e)}))
        else:
            print(f"error: {e}")
        return ANALYSIS_FAILURE
    i, j, g = report.witness
    if args.json:
        payload = {
            "uncurried_over": uncurried,
            "label": report.label,
            "unitary": report.unitary,
            "isometry": report.isometry,
            "square": report.square,
            "deviation": report.deviation,
            "witness": [i, j, _complex_pair(g)],
            "basis": print_basis(report.basis),
            "matrix": [
                [_complex_pair(z) for z in row] for row in report.matrix
            ],
        }
        print(json.dumps(payload))
    else:
        if uncurried is not None:
            print(f"uncurried over {uncurried}")
        print(f"basis: {print_basis(report.basis)}")
        print("matrix:")
        for row in report.matrix:
            print("  [ " + "  ".join(_fmt_entry(z) for z in row) + " ]")
        print(f"{report.label} (deviation {report.deviation:.3g})")
        if not report.isometry:
            print(f"witness: gram entry ({i},{j}) = {g:.6g}")
    return 0 if report.unitary else ANALYSIS_FAILURE


def _cmd_corpus(args, bases, defs) -> int:
    rows = run_corpus(args.max_steps)
    if args.json:
        passed = sum(1 for r in rows if r.ok)
        payload = {
            "rows": [asdict(r) for r in rows],
            "passed": passed,
            "failed": len(rows) - passed,
        }
        print(json.dumps(payload))
    else:
        print(format_rows(rows))
    return 0 if all(r.ok for r in rows) else ANALYSIS_FAILURE


_REPL_HELP = """commands:
  TERM             evaluate a term
  :t TERM : TYPE   check the term against the type
  :u TERM          report whether the term denotes a unit map
  :h               this message
  :q               quit"""


def _repl_line(line: str, bases, defs, max_steps: int) -> None:
    if line.startswith(":t "):
        rest = line[3:]
        if " : " not in rest:
            print("usage: :t TERM : TYPE")
            return
        term_src, type_src = rest.rsplit(" : ", 1)
        d = parse_term(term_src, bases, defs)
        goal = parse_type(type_src, bases)
        try:
            deriv = check({}, d, goal, max_steps)
        except CheckError as e:
            print(f"type error: {e}")
            return
        print(f"well-typed via {deriv.rule}")
        return
    if line.startswith(":u "):
        d, _ = _auto_uncurry(parse_term(line[3:], bases, defs))
        report = check_unitary(d, max_steps=max_steps)
        print(f"{report.label} (deviation {report.deviation:.3g})")
        return
    d = parse_term(line, bases, defs)
    trace = evaluate(d, max_steps)
    if isinstance(trace.final, NormalForm):
        nf = trace.final.dist
        if nf.is_zero():
            normalized, phase = nf, complex(1.0)
        else:
            normalized, phase = phase_normalize(nf)
        note = f"[steps {trace.fuel_used}, phase {_fmt_phase(phase)}]"
        print(f"{print_term(normalized)}  {note}")
    else:
        print(f"stuck: {trace.final.reason}")
        if trace.final.offending is not None:
            print(f"at: {print_term(single(trace.final.offending))}")


def _cmd_repl(args, bases, defs) -> int:
    print("basis-sensitive lambda calculus; :h for help, :q to quit")
    while True:
        try:
            line = input("lb> ")
        except EOFError:
            print()
            break
        line = line.strip()
        if not line:
            continue
        if line in (":q", ":quit"):
            break
        if line in (":h", ":help"):
            print(_REPL_HELP)
            continue
        try:
            _repl_line(line, bases, defs, args.max_steps)
        except (ParseError, CheckError, UnitaryError, ValueError) as e:
            print(f"error: {e}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing.


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--max-steps",
        type=int,
        default=100000,
        metavar="N",
        help="evaluation fuel (default 100000)",
    )
    common.add_argument(
        "--eps",
        type=float,
        default=None,
        metavar="E",
        help="numeric comparison tolerance (default 1e-9)",
    )
    common.add_argument(
        "--json",
        action="store_true",
        help="emit a JSON object instead of text",
    )
    common.add_argument(
        "--def",
        dest="def_files",
        action="append",
        default=[],
        metavar="FILE",
        help="load named definitions and bases from a program file "
        "(repeatable)",
    )

    parser = argparse.ArgumentParser(
        prog="basislam",
        description="Evaluate, type-check, and analyze terms of a "
        "basis-sensitive quantum lambda calculus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "parse",
        parents=[common],
        help="parse a term and print its canonical form",
    )
    p.add_argument("term", metavar="TERM")
    p.add_argument(
        "--type",
        action="store_true",
        help="treat the input as a type instead of a term",
    )
    p.set_defaults(handler=_cmd_parse)

    p = sub.add_parser(
        "eval", parents=[common], help="reduce a term to normal form"
    )
    p.add_argument("term", metavar="TERM")
    p.add_argument(
        "--trace", action="store_true", help="print every reduction step"
    )
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser(
        "check",
        parents=[common],
        help="check a closed term against a type",
    )
    p.add_argument("term", metavar="TERM")
    p.add_argument("type_", metavar="TYPE")
    p.set_defaults(handler=_cmd_check)

    p = sub.add_parser(
        "ortho",
        parents=[common],
        help="decide the orthogonality judgement for two terms",
    )
    p.add_argument("left", metavar="TERM")
    p.add_argument("right", metavar="TERM")
    p.add_argument("type_", metavar="TYPE")
    p.set_defaults(handler=_cmd_ortho)

    p = sub.add_parser(
        "unitary",
        parents=[common],
        help="extract the matrix of an abstraction and test unitarity",
    )
    p.add_argument("term", metavar="TERM")
    p.set_defaults(handler=_cmd_unitary)

    p = sub.add_parser(
        "repl", parents=[common], help="interactive read-eval loop"
    )
    p.set_defaults(handler=_cmd_repl)

    p = sub.add_parser(
        "corpus",
        parents=[common],
        help="run the bundled example corpus and print a result table",
    )
    p.set_defaults(handler=_cmd_corpus)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.eps is not None:
        try:
            set_eps(args.eps)
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return USAGE_ERROR
    try:
        bases, defs = _environment(args.def_files)
        return args.handler(args, bases, defs)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
