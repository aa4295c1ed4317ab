#!/usr/bin/env python3
"""Teleport random one-qubit states through the bundled corpus protocol.

Each input state is applied to the teleport abstraction and reduced to
normal form.  The result is compared against the analytic coherent
mixture built directly in the calculus: the equal-weight sum over the
four Bell outcomes, each paired with the (corrected) input state.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from basislam import (
    BELL,
    NormalForm,
    add,
    check,
    dist_eq,
    evaluate,
    from_vector,
    mk_app,
    mk_pair,
    norm,
    parse_type,
    scale,
    sub,
    zero,
)
from basislam.corpus import corpus_program


@dataclass
class Config:
    n_states: int = 20
    seed: int = 2026
    max_steps: int = 100000


def random_state(rng: np.random.Generator):
    vec = rng.normal(size=2) + 1j * rng.normal(size=2)
    vec = vec / np.linalg.norm(vec)
    return from_vector(vec, 1)


def analytic_mixture(psi):
    """Equal-weight pairing of every Bell outcome with the input state."""
    out = zero()
    for bell in BELL.elements:
        out = add(out, scale(0.5, mk_pair(bell, psi)))
    return out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-states", type=int, default=Config.n_states)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--max-steps", type=int, default=Config.max_steps)
    args = ap.parse_args()
    cfg = Config(args.n_states, args.seed, args.max_steps)

    prog = corpus_program("teleport")
    teleport = prog.defs["Teleport"]
    rng = np.random.default_rng(cfg.seed)

    worst = 0.0
    failures = 0
    for k in range(cfg.n_states):
        psi = random_state(rng)
        trace = evaluate(mk_app(teleport, psi), max_steps=cfg.max_steps)
        if not isinstance(trace.final, NormalForm):
            print(f"state {k:2d}: STUCK ({trace.final.reason})")
            failures += 1
            continue
        expected = analytic_mixture(psi)
        residual = norm(sub(trace.final.dist, expected))
        agree = dist_eq(trace.final.dist, expected)
        worst = max(worst, residual)
        if not agree:
            failures += 1
        print(
            f"state {k:2d}: steps={len(trace.steps):<3}"
            f" residual={residual:.2e}  {'ok' if agree else 'MISMATCH'}"
        )

    goal = parse_type("#[B] -> #[Bell] * #[B]")
    check({}, teleport, goal)
    print(f"\nworst residual over {cfg.n_states} states: {worst:.2e}")
    print("protocol well-typed at #[B] -> #[Bell] * #[B]")
    print("result:", "all states teleported exactly" if not failures else f"{failures} FAILURES")
    return 0 if not failures else 1


if __name__ == "__main__":
    sys.exit(main())
