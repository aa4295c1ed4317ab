"""Weak call-by-value reduction on canonical distributions.

The strategy never reduces under a lambda, inside a case branch, or in a
let body; it does reduce in both components of a pair, in the argument
and then the function of an application, and in let and case scrutinees.
Within a distribution the canonically first reducible summand fires.
Summands that share the same surrounding context and the same redex up
to its value slot fire together: their slots are recombined into one
value distribution and substituted through the binder's annotation basis
in a single step, which is reduction modulo the vector-space congruence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .basis import decompose
from .core import (
    App,
    Case,
    Lam,
    LetPair,
    Ortho,
    Pair,
    PureTerm,
    TermDist,
    Var,
    add,
    is_pure_value,
    scale,
    single,
    term_eq,
)
from .subst import SubstUndefined, subst_basis, subst_tensor, subst_term

_HOLE = "__hole__"  # lexer identifiers never start with an underscore


class RuleTag(enum.Enum):
    BETA = "Beta"
    LET_TENSOR = "LetTensor"
    CASE_MATCH = "CaseMatch"
    CTX_APP_LEFT = "CtxAppLeft"
    CTX_APP_RIGHT = "CtxAppRight"
    CTX_PAIR_LEFT = "CtxPairLeft"
    CTX_PAIR_RIGHT = "CtxPairRight"
    CTX_SCALAR = "CtxScalar"
    CTX_SUM = "CtxSum"
    CTX_LET = "CtxLet"
    CTX_CASE = "CtxCase"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, eq=False)
class Reduced:
    dist: TermDist
    rule: RuleTag


@dataclass(frozen=True, eq=False)
class NormalForm:
    dist: TermDist


@dataclass(frozen=True, eq=False)
class Stuck:
    reason: str
    offending: Optional[PureTerm]


StepResult = Union[Reduced, NormalForm, Stuck]


@dataclass
class Trace:
    steps: list[tuple[TermDist, RuleTag]] = field(default_factory=list)
    final: Optional[StepResult] = None
    fuel_used: int = 0


# ---------------------------------------------------------------------------
# Redex search.  A located redex is described by two pure terms: the
# context, with a hole variable at the redex node, and the redex itself,
# with the hole at its value slot.  The search direction taken at the
# root decides the context rule that names the step.


@dataclass
class _Redex:
    kind: str  # "beta" | "lettensor" | "casematch"
    context: PureTerm
    redex_repr: PureTerm
    slot: PureTerm
    first_dir: Optional[str]


@dataclass
class _Stk:
    reason: str
    offending: PureTerm


_Found = Union[_Redex, _Stk]

_DIR_TAG = {
    "app-left": RuleTag.CTX_APP_LEFT,
    "app-right": RuleTag.CTX_APP_RIGHT,
    "pair-left": RuleTag.CTX_PAIR_LEFT,
    "pair-right": RuleTag.CTX_PAIR_RIGHT,
    "let": RuleTag.CTX_LET,
    "case": RuleTag.CTX_CASE,
}

_BASE_TAG = {
    "beta": RuleTag.BETA,
    "lettensor": RuleTag.LET_TENSOR,
    "casematch": RuleTag.CASE_MATCH,
}


def _wrap(
    sub: _Found, build: Callable[[PureTerm], PureTerm], direction: str
) -> _Found:
    if isinstance(sub, _Stk):
        return sub
    return _Redex(
        kind=sub.kind,
        context=build(sub.context),
        redex_repr=sub.redex_repr,
        slot=sub.slot,
        first_dir=direction,
    )


def _find(t: PureTerm) -> Optional[_Found]:
    """Locate the redex this strategy fires inside a pure term, a stuck
    position blocking it, or None when t is already a pure value."""
    if is_pure_value(t):
        return None
    if isinstance(t, Pair):
        if not is_pure_value(t.left):
            sub = _find(t.left)
            assert sub is not None
            return _wrap(sub, lambda c: Pair(c, t.right), "pair-left")
        sub = _find(t.right)
        assert sub is not None
        return _wrap(sub, lambda c: Pair(t.left, c), "pair-right")
    if isinstance(t, App):
        if not is_pure_value(t.arg):
            sub = _find(t.arg)
            assert sub is not None
            return _wrap(sub, lambda c: App(t.fun, c), "app-right")
        if not is_pure_value(t.fun):
            sub = _find(t.fun)
            assert sub is not None
            return _wrap(sub, lambda c: App(c, t.arg), "app-left")
        if isinstance(t.fun, Lam):
            return _Redex(
                kind="beta",
                context=Var(_HOLE),
                redex_repr=App(t.fun, Var(_HOLE)),
                slot=t.arg,
                first_dir=None,
            )
        if isinstance(t.fun, Var):
            return _Stk("free variable", t.fun)
        return _Stk("non-value in value position", t.fun)
    if isinstance(t, LetPair):
        if not is_pure_value(t.scrutinee):
            sub = _find(t.scrutinee)
            assert sub is not None
            return _wrap(
                sub,
                lambda c: LetPair(
                    t.var1, t.basis1, t.var2, t.basis2, c, t.body
                ),
                "let",
            )
        if isinstance(t.scrutinee, Var):
            return _Stk("free variable", t.scrutinee)
        return _Redex(
            kind="lettensor",
            context=Var(_HOLE),
            redex_repr=LetPair(
                t.var1, t.basis1, t.var2, t.basis2, Var(_HOLE), t.body
            ),
            slot=t.scrutinee,
            first_dir=None,
        )
    if isinstance(t, Case):
        if not is_pure_value(t.scrutinee):
            sub = _find(t.scrutinee)
            assert sub is not None
            return _wrap(
                sub, lambda c: Case(c, t.patterns, t.branches), "case"
            )
        if isinstance(t.scrutinee, Var):
            return _Stk("free variable", t.scrutinee)
        return _Redex(
            kind="casematch",
            context=Var(_HOLE),
            redex_repr=Case(Var(_HOLE), t.patterns, t.branches),
            slot=t.scrutinee,
            first_dir=None,
        )
    raise TypeError(f"not a pure term: {t!r}")


def _same_redex(a: _Redex, b: _Redex) -> bool:
    return (
        a.kind == b.kind
        and term_eq(a.context, b.context)
        and term_eq(a.redex_repr, b.redex_repr)
    )


def _instance(r: _Redex, slot: PureTerm) -> PureTerm:
    filled = subst_term(r.redex_repr, _HOLE, single(slot))
    assert len(filled) == 1
    return filled.entries[0][0]


def _fire(r: _Redex, value: TermDist) -> Union[TermDist, Stuck]:
    offending = _instance(r, value.entries[0][0]) if value.entries else None
    if r.kind == "beta":
        node = r.redex_repr
        assert isinstance(node, App) and isinstance(node.fun, Lam)
        lam = node.fun
        try:
            return subst_basis(lam.body, lam.var, value, lam.basis)
        except SubstUndefined as e:
            return Stuck(e.reason, offending)
    if r.kind == "lettensor":
        node = r.redex_repr
        assert isinstance(node, LetPair)
        try:
            return subst_tensor(
                node.body, node.var1, node.basis1, node.var2, node.basis2,
                value,
            )
        except SubstUndefined as e:
            return Stuck(e.reason, offending)
    node = r.redex_repr
    assert isinstance(node, Case)
    coeffs = decompose(value, Ortho(node.patterns))
    if coeffs is None:
        return Stuck("case scrutinee outside pattern span", offending)
    out = add(*(scale(c, b) for c, b in zip(coeffs, node.branches)))
    return out


def step(d: TermDist, chosen: Optional[int] = None) -> StepResult:
    """One deterministic step: the canonically first reducible summand
    fires, together with every summand sharing its context and redex.
    `chosen` overrides the summand selection, for confluence tests."""
    finds = [_find(t) for t, _ in d.entries]
    if chosen is not None and not isinstance(finds[chosen], _Redex):
        raise ValueError("chosen summand is not reducible")
    if chosen is None:
        idx = next(
            (i for i, f in enumerate(finds) if isinstance(f, _Redex)), None
        )
    else:
        idx = chosen
    if idx is None:
        for f in finds:
            if isinstance(f, _Stk):
                return Stuck(f.reason, f.offending)
        return NormalForm(d)
    picked = finds[idx]
    assert isinstance(picked, _Redex)

    group = [
        i
        for i, f in enumerate(finds)
        if isinstance(f, _Redex) and _same_redex(f, picked)
    ]
    value = add(
        *(scale(d.entries[i][1], single(finds[i].slot)) for i in group)
    )
    fired = _fire(picked, value)
    if isinstance(fired, Stuck):
        return fired
    plugged = subst_term(picked.context, _HOLE, fired)
    rest = add(
        *(
            scale(c, single(t))
            for i, (t, c) in enumerate(d.entries)
            if i not in group
        )
    )
    result = add(plugged, rest)

    if len(group) < len(d.entries):
        tag = RuleTag.CTX_SUM
    elif len(group) == 1 and abs(d.entries[group[0]][1] - 1) > 1e-12:
        tag = RuleTag.CTX_SCALAR
    elif picked.first_dir is not None:
        tag = _DIR_TAG[picked.first_dir]
    else:
        tag = _BASE_TAG[picked.kind]
    return Reduced(result, tag)


def evaluate(d: TermDist, max_steps: int = 100000) -> Trace:
    """Reduce to normal form, recording every step; stops with a stuck
    result or after the fuel runs out."""
    trace = Trace()
    current = d
    for used in range(max_steps):
        res = step(current)
        if isinstance(res, Reduced):
            trace.steps.append((res.dist, res.rule))
            current = res.dist
            continue
        trace.final = res
        trace.fuel_used = used
        return trace
    res = step(current)
    if isinstance(res, Reduced):
        trace.final = Stuck(f"fuel exhausted after {max_steps} steps", None)
    else:
        trace.final = res
    trace.fuel_used = max_steps
    return trace


def evaluate_value(
    d: TermDist, max_steps: int = 100000
) -> Optional[TermDist]:
    """The normal form of d, or None when evaluation sticks or the fuel
    runs out."""
    trace = evaluate(d, max_steps)
    if isinstance(trace.final, NormalForm):
        return trace.final.dist
    return None


# the reduction relation is written as an evaluator; keep the short name
eval = evaluate
