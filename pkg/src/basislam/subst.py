"""Substitution: plain capture-avoiding, basis-directed, and tensor.

Plain substitution replaces a variable by a whole distribution, keeping
sums intact under binders.  Basis-directed substitution first decomposes
the incoming value over the binder's annotation basis and substitutes
each basis element separately; it is undefined when the value falls
outside the annotation span.  Tensor substitution does the same for the
two components of a pair binder.
"""

from __future__ import annotations

from typing import Optional

from .basis import decompose, product_basis
from .core import (
    ABS,
    AbsBasis,
    App,
    Basis,
    Case,
    Ket,
    Lam,
    LetPair,
    Ortho,
    Pair,
    PureTerm,
    TermDist,
    Var,
    add,
    free_vars,
    is_closed,
    is_pure_value,
    is_value_dist,
    mk_app,
    mk_case,
    mk_lam,
    mk_letpair,
    mk_pair,
    scale,
    single,
    term_eq,
    zero,
)


class SubstUndefined(Exception):
    """The substituted value cannot be decomposed as required (outside
    the annotation span, or not a pair for a tensor binder)."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def fresh_name(base: str, avoid: frozenset[str]) -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


# ---------------------------------------------------------------------------
# Plain substitution.  The substituted distribution enters term formers
# through the smart constructors, so sums distribute exactly where the
# congruence allows and nowhere else.


def subst_term(t: PureTerm, x: str, v: TermDist) -> TermDist:
    if isinstance(t, Var):
        return v if t.name == x else single(t)
    if isinstance(t, Ket):
        return single(t)
    if isinstance(t, Pair):
        return mk_pair(subst_term(t.left, x, v), subst_term(t.right, x, v))
    if isinstance(t, App):
        return mk_app(subst_term(t.fun, x, v), subst_term(t.arg, x, v))
    if isinstance(t, Lam):
        if t.var == x or x not in free_vars(t.body):
            return single(t)
        var, body = t.var, t.body
        fv = free_vars(v)
        if var in fv:
            var2 = fresh_name(var, fv | free_vars(body) | {x})
            body = subst_dist(body, var, single(Var(var2)))
            var = var2
        return mk_lam(var, t.basis, subst_dist(body, x, v))
    if isinstance(t, LetPair):
        scrut = subst_term(t.scrutinee, x, v)
        var1, var2, body = t.var1, t.var2, t.body
        if x in (var1, var2) or x not in free_vars(body):
            return mk_letpair(var1, t.basis1, var2, t.basis2, scrut, body)
        fv = free_vars(v)
        if var1 in fv:
            new1 = fresh_name(var1, fv | free_vars(body) | {x, var2})
            body = subst_dist(body, var1, single(Var(new1)))
            var1 = new1
        if var2 in fv:
            new2 = fresh_name(var2, fv | free_vars(body) | {x, var1})
            body = subst_dist(body, var2, single(Var(new2)))
            var2 = new2
        return mk_letpair(
            var1, t.basis1, var2, t.basis2, scrut, subst_dist(body, x, v)
        )
    if isinstance(t, Case):
        scrut = subst_term(t.scrutinee, x, v)
        branches = tuple(subst_dist(b, x, v) for b in t.branches)
        return mk_case(scrut, t.patterns, branches)
    raise TypeError(f"not a pure term: {t!r}")


def subst_dist(d: TermDist, x: str, v: TermDist) -> TermDist:
    return add(*(scale(c, subst_term(t, x, v)) for t, c in d.entries))


# ---------------------------------------------------------------------------
# Basis-directed substitution.


def subst_basis(body: TermDist, x: str, v: TermDist, basis: Basis) -> TermDist:
    """Substitute a value distribution for x in body, decomposing v over
    the binder's annotation basis first.

    With an abstraction annotation the decomposition is the canonical one
    over pure values, so each pure value in v is substituted separately.
    With an orthonormal annotation v is rewritten over that basis; if it
    has a component outside the span the substitution is undefined.
    """
    if not is_value_dist(v):
        raise ValueError("substituted distribution must be a value")
    if isinstance(basis, AbsBasis):
        return add(
            *(scale(c, subst_dist(body, x, single(t))) for t, c in v.entries)
        )
    coeffs = decompose(v, basis)
    if coeffs is None:
        raise SubstUndefined("argument not in annotation span")
    out = zero()
    for c, element in zip(coeffs, basis.elements):
        if c != 0:
            out = add(out, scale(c, subst_dist(body, x, element)))
    return out


def subst_tensor(
    body: TermDist,
    x1: str,
    b1: Basis,
    x2: str,
    b2: Basis,
    v: TermDist,
) -> TermDist:
    """Substitute the two components of a pair value for the binders of a
    let, each decomposed over its own annotation basis.

    Requires a closed value: the two component substitutions commute only
    when neither value mentions the other binder.
    """
    if not is_value_dist(v):
        raise ValueError("substituted distribution must be a value")
    if not is_closed(v):
        raise ValueError("tensor substitution needs a closed value")
    if x1 == x2:
        raise ValueError("let pair binders must be distinct")
    if not all(isinstance(t, Pair) for t, _ in v.entries):
        raise SubstUndefined("argument not in annotation span")

    if isinstance(b1, Ortho) and isinstance(b2, Ortho):
        prod = product_basis(b1, b2)
        coeffs = decompose(v, prod)
        if coeffs is None:
            raise SubstUndefined("argument not in annotation span")
        k = len(b2.elements)
        out = zero()
        for idx, c in enumerate(coeffs):
            if c == 0:
                continue
            left = b1.elements[idx // k]
            right = b2.elements[idx % k]
            piece = subst_dist(subst_dist(body, x1, left), x2, right)
            out = add(out, scale(c, piece))
        return out

    if isinstance(b1, AbsBasis) and isinstance(b2, AbsBasis):
        out = zero()
        for t, c in v.entries:
            assert isinstance(t, Pair)
            piece = subst_dist(
                subst_dist(body, x1, single(t.left)), x2, single(t.right)
            )
            out = add(out, scale(c, piece))
        return out

    # One abstraction side: group the pair entries by the pure value on
    # that side and decompose the residual on the other side.
    if isinstance(b1, AbsBasis):
        groups = _group_pairs(v, by_left=True)
        out = zero()
        for key, residual in groups:
            piece = subst_dist(body, x1, single(key))
            out = add(out, subst_basis(piece, x2, residual, b2))
        return out

    groups = _group_pairs(v, by_left=False)
    out = zero()
    for key, residual in groups:
        piece = subst_dist(body, x2, single(key))
        out = add(out, subst_basis(piece, x1, residual, b1))
    return out


def _group_pairs(
    v: TermDist, by_left: bool
) -> list[tuple[PureTerm, TermDist]]:
    groups: list[tuple[PureTerm, TermDist]] = []
    for t, c in v.entries:
        assert isinstance(t, Pair)
        key = t.left if by_left else t.right
        rest = t.right if by_left else t.left
        for i, (k, acc) in enumerate(groups):
            if term_eq(k, key):
                groups[i] = (k, add(acc, scale(c, single(rest))))
                break
        else:
            groups.append((key, scale(c, single(rest))))
    return groups


# ---------------------------------------------------------------------------
# Context substitutions: one closed value per variable, each substituted
# through its binding's annotation basis.


def apply_sigma(
    d: TermDist, sigma: dict[str, tuple[TermDist, Basis]]
) -> TermDist:
    out = d
    for name in sorted(sigma):
        value, basis = sigma[name]
        if not is_closed(value):
            raise ValueError("context substitutions must be closed values")
        out = subst_basis(out, name, value, basis)
    return out
