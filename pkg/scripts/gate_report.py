#!/usr/bin/env python3
"""Unitarity survey over the bundled gate corpus.

Every definition is analysed with the gram-matrix check; curried
two-argument gates are first wrapped as a single abstraction over the
product of their annotation bases.  For square maps the verdict is
compared against semantic membership in the sharp arrow over the same
span — the two must agree wherever membership is decided.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from basislam import (
    Lam,
    Ortho,
    TermDist,
    Undecidable,
    check_unitary,
    is_member,
    uncurry2,
)
from basislam.typesem import Arrow, BasisType, Sharp
from basislam.corpus import corpus_program


@dataclass
class Config:
    tol: float = 1e-6
    max_steps: int = 100000


def curried_parts(term: TermDist):
    """(outer basis, inner basis) when the term is a curried two-argument
    abstraction with orthonormal annotations, else None."""
    if len(term) != 1:
        return None
    outer = term.terms()[0]
    if not isinstance(outer, Lam) or not isinstance(outer.basis, Ortho):
        return None
    body = outer.body
    if len(body) != 1:
        return None
    inner = body.terms()[0]
    if not isinstance(inner, Lam) or not isinstance(inner.basis, Ortho):
        return None
    return outer.basis, inner.basis


def basis_label(b: Ortho) -> str:
    return b.name or f"<{len(b.elements)} elements>"


def survey(name: str, term: TermDist, cfg: Config) -> bool:
    parts = curried_parts(term)
    note = ""
    if parts is not None:
        left, right = parts
        term = uncurry2(term, left, right)
        note = f" (uncurried over {basis_label(left)} x {basis_label(right)})"
    report = check_unitary(term, tol=cfg.tol, max_steps=cfg.max_steps)
    rows, cols = report.matrix.shape
    member = None
    if report.square:
        span = Sharp(BasisType(report.basis))
        try:
            member = is_member(term, Arrow(span, span))
        except Undecidable:
            member = None
    member_txt = {True: "yes", False: "no", None: "undecided"}[member]
    agree = "-"
    if member is not None:
        agree = "ok" if (report.label == "unitary") == member else "DISAGREE"
    print(
        f"  {name:<7} {rows}x{cols}  {report.label:<12}"
        f" deviation={report.deviation:.2e}  member={member_txt:<9}"
        f" agreement={agree}{note}"
    )
    return agree != "DISAGREE"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=Config.tol)
    ap.add_argument("--max-steps", type=int, default=Config.max_steps)
    args = ap.parse_args()
    cfg = Config(tol=args.tol, max_steps=args.max_steps)

    prog = corpus_program("gates")
    print("gate survey:")
    ok = True
    for name, term in prog.defs.items():
        ok = survey(name, term, cfg) and ok
    print("result:", "verdicts and membership agree" if ok else "DISAGREEMENTS above")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
