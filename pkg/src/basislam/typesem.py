"""Types as sets of value distributions.

A basis type collects the elements of an orthonormal family; a product
collects literal pairs of members; an arrow collects norm-1 sums of
equally annotated abstractions mapping members of the domain to
realizers of the codomain; a sharp type is the span of its argument's
members intersected with the unit sphere.  Membership is decided where
the structure allows it and raises Undecidable where it does not.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .basis import decompose
from .core import (
    AbsBasis,
    Lam,
    Ortho,
    Pair,
    PureTerm,
    TermDist,
    add,
    basis_eq,
    dist_eq,
    inner_product,
    is_value_dist,
    mk_app,
    mk_pair,
    norm,
    sc_eq,
    sc_is_zero,
    scale,
    single,
    term_eq,
    zero,
)
from .reduction import NormalForm, evaluate


@dataclass(frozen=True, eq=False)
class BasisType:
    basis: Ortho


@dataclass(frozen=True, eq=False)
class Arrow:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True, eq=False)
class Prod:
    left: "Type"
    right: "Type"


@dataclass(frozen=True, eq=False)
class Sharp:
    inner: "Type"


Type = Union[BasisType, Arrow, Prod, Sharp]


class Undecidable(Exception):
    def __init__(self, message: str = "membership undecidable for this domain"):
        super().__init__(message)
        self.message = message


def sharp(t: Type) -> Type:
    """Wrap in a sharp, collapsing an immediate double sharp."""
    t = sharp_normalize(t)
    return t if isinstance(t, Sharp) else Sharp(t)


def sharp_normalize(t: Type) -> Type:
    if isinstance(t, BasisType):
        return t
    if isinstance(t, Arrow):
        return Arrow(sharp_normalize(t.dom), sharp_normalize(t.cod))
    if isinstance(t, Prod):
        return Prod(sharp_normalize(t.left), sharp_normalize(t.right))
    inner = sharp_normalize(t.inner)
    return inner if isinstance(inner, Sharp) else Sharp(inner)


def _basis_set_eq(a: Ortho, b: Ortho) -> bool:
    if len(a.elements) != len(b.elements):
        return False
    used = [False] * len(b.elements)
    for e in a.elements:
        for j, f in enumerate(b.elements):
            if not used[j] and dist_eq(e, f):
                used[j] = True
                break
        else:
            return False
    return True


def type_eq(a: Type, b: Type) -> bool:
    """Structural equality after sharp normalization; basis types compare
    their elements as multisets."""
    a, b = sharp_normalize(a), sharp_normalize(b)
    return _type_eq(a, b)


def _type_eq(a: Type, b: Type) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, BasisType):
        return _basis_set_eq(a.basis, b.basis)
    if isinstance(a, Arrow):
        return _type_eq(a.dom, b.dom) and _type_eq(a.cod, b.cod)
    if isinstance(a, Prod):
        return _type_eq(a.left, b.left) and _type_eq(a.right, b.right)
    return _type_eq(a.inner, b.inner)


def finite_members(t: Type) -> Optional[list[TermDist]]:
    """The complete list of members when the type denotes a finite set."""
    t = sharp_normalize(t)
    if isinstance(t, BasisType):
        return list(t.basis.elements)
    if isinstance(t, Prod):
        left = finite_members(t.left)
        right = finite_members(t.right)
        if left is None or right is None:
            return None
        return [mk_pair(l, r) for l in left for r in right]
    return None


def span_generators(t: Type) -> Optional[list[TermDist]]:
    """An orthonormal family spanning the same space as the type's
    members, when one exists."""
    t = sharp_normalize(t)
    if isinstance(t, BasisType):
        return list(t.basis.elements)
    if isinstance(t, Sharp):
        return span_generators(t.inner)
    if isinstance(t, Prod):
        left = span_generators(t.left)
        right = span_generators(t.right)
        if left is None or right is None:
            return None
        return [mk_pair(l, r) for l in left for r in right]
    return None


def _in_span(v: TermDist, gens: list[TermDist]) -> bool:
    return decompose(v, Ortho(tuple(gens))) is not None


# ---------------------------------------------------------------------------
# Membership.


def is_member(v: TermDist, t: Type) -> bool:
    return _member(v, sharp_normalize(t), phase=False)


def is_member_phase(v: TermDist, t: Type) -> bool:
    """Membership up to a global phase."""
    return _member(v, sharp_normalize(t), phase=True)


def _member(v: TermDist, t: Type, phase: bool) -> bool:
    if not is_value_dist(v):
        raise ValueError("membership is defined on value distributions")
    if v.is_zero():
        return False
    if isinstance(t, BasisType):
        for e in t.basis.elements:
            if phase:
                o = inner_product(e, v)
                if sc_eq(abs(o), 1.0) and dist_eq(v, scale(o, e)):
                    return True
            elif dist_eq(v, e):
                return True
        return False
    if isinstance(t, Sharp):
        gens = span_generators(t)
        if gens is None:
            # span of an arrow type: a member of the arrow itself is the
            # only certificate this checker can produce
            if _member(v, sharp_normalize(t.inner), True):
                return True
            raise Undecidable()
        return sc_eq(norm(v), 1.0) and _in_span(v, gens)
    if isinstance(t, Prod):
        return _prod_member(v, t, phase)
    return _arrow_member(v, t, phase)


def _prod_member(v: TermDist, t: Prod, phase: bool) -> bool:
    if not all(isinstance(u, Pair) for u, _ in v.entries):
        return False
    for side in ("left", "right"):
        this = t.left if side == "left" else t.right
        other = t.right if side == "left" else t.left
        members = finite_members(this)
        if members is None:
            continue
        # the factor on a finite side must be one of its members exactly;
        # any global phase moves into the residual factor
        for m in members:
            residual = zero()
            for u, c in v.entries:
                assert isinstance(u, Pair)
                mine = u.left if side == "left" else u.right
                overlap = inner_product(m, single(mine))
                if overlap != 0:
                    rest = u.right if side == "left" else u.left
                    residual = add(residual, scale(c * overlap, single(rest)))
            if residual.is_zero():
                continue
            rebuilt = (
                mk_pair(m, residual) if side == "left" else mk_pair(residual, m)
            )
            if dist_eq(rebuilt, v):
                return _member(residual, sharp_normalize(other), phase)
        return False
    return _rank1_member(v, t)


def _rank1_member(v: TermDist, t: Prod) -> bool:
    """Both factor types are spans: factor the coefficient matrix and
    test the two factors, which works because spans absorb the phase
    split between them."""
    gl = span_generators(t.left)
    gr = span_generators(t.right)
    if gl is None or gr is None:
        raise Undecidable()
    lefts: list[PureTerm] = []
    rights: list[PureTerm] = []
    coeffs: dict[tuple[int, int], complex] = {}
    for u, c in v.entries:
        assert isinstance(u, Pair)
        i = _class_index(lefts, u.left)
        j = _class_index(rights, u.right)
        coeffs[(i, j)] = coeffs.get((i, j), 0) + c
    m = np.zeros((len(lefts), len(rights)), dtype=complex)
    for (i, j), c in coeffs.items():
        m[i, j] = c
    u_mat, s, vh = np.linalg.svd(m)
    if len(s) > 1 and not sc_is_zero(s[1]):
        return False
    left_factor = add(
        *(scale(u_mat[i, 0], single(lt)) for i, lt in enumerate(lefts))
    )
    right_factor = add(
        *(scale(s[0] * vh[0, j], single(rt)) for j, rt in enumerate(rights))
    )
    return _member(left_factor, sharp_normalize(t.left), True) and _member(
        right_factor, sharp_normalize(t.right), True
    )


def _class_index(classes: list[PureTerm], t: PureTerm) -> int:
    for i, u in enumerate(classes):
        if term_eq(u, t):
            return i
    classes.append(t)
    return len(classes) - 1


def _arrow_member(v: TermDist, t: Arrow, phase: bool) -> bool:
    lams = [u for u, _ in v.entries]
    if not all(isinstance(u, Lam) for u in lams):
        return False
    annotation = lams[0].basis
    if not all(basis_eq(u.basis, annotation) for u in lams[1:]):
        # abstractions over different bases never share an arrow type
        return False
    if not sc_eq(norm(v), 1.0):
        return False
    dom = sharp_normalize(t.dom)
    cod = sharp_normalize(t.cod)

    members = finite_members(dom)
    if members is not None:
        return all(realizes(mk_app(v, m), cod) for m in members)

    gens = span_generators(dom)
    if gens is None:
        raise Undecidable()
    if isinstance(cod, Arrow):
        return _curried_member(v, t)
    if not isinstance(cod, Sharp):
        raise Undecidable()
    if span_generators(cod) is None:
        raise Undecidable()
    # the action on the domain span is linear, so orthonormal images of
    # an orthonormal generating family decide membership
    images: list[TermDist] = []
    for g in gens:
        trace = evaluate(mk_app(v, g))
        if not isinstance(trace.final, NormalForm):
            return False
        w = trace.final.dist
        if not _member(w, cod, True):
            return False
        images.append(w)
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            if not sc_is_zero(inner_product(images[i], images[j])):
                if isinstance(dom, Sharp):
                    return False
                # a product domain does not contain the combination that
                # witnesses the failure
                raise Undecidable()
    return True


def _curried_member(v: TermDist, t: Arrow) -> bool:
    """Curried arrows with span domains: the map extends multilinearly
    from the domain generators, so its behavior is pinned by the images
    of generator tuples.  A finite domain layer admits no superpositions
    and splits the grid into independent families.  For a span codomain,
    membership holds exactly when every image lands in the span with
    unit norm and images of distinct tuples are orthogonal.  For a
    product codomain only single-axis combinations are realizable by
    arguments, so failures there refute membership, while success with
    more than one span axis is left undecided."""
    layers: list[tuple[bool, list[TermDist]]] = []
    cur: Type = t
    while isinstance(cur, Arrow):
        dom = sharp_normalize(cur.dom)
        members = finite_members(dom)
        if members is not None:
            layers.append((False, members))
        else:
            gens = span_generators(dom) if isinstance(dom, Sharp) else None
            if gens is None:
                raise Undecidable()
            layers.append((True, gens))
        cur = sharp_normalize(cur.cod)
    span_cod = isinstance(cur, Sharp) and span_generators(cur) is not None
    if not span_cod and not isinstance(cur, Prod):
        raise Undecidable()
    finite_axes = [k for k, (sp, _) in enumerate(layers) if not sp]
    sharp_axes = [k for k, (sp, _) in enumerate(layers) if sp]
    half = 2.0 ** -0.5

    for fixed in itertools.product(*(layers[k][1] for k in finite_axes)):
        grid: dict[tuple[int, ...], TermDist] = {}
        index_pools = [range(len(layers[k][1])) for k in sharp_axes]
        for varying in itertools.product(*index_pools):
            args: list[Optional[TermDist]] = [None] * len(layers)
            for k, val in zip(finite_axes, fixed):
                args[k] = val
            for k, idx in zip(sharp_axes, varying):
                args[k] = layers[k][1][idx]
            app = v
            for a in args:
                app = mk_app(app, a)
            trace = evaluate(app)
            if not isinstance(trace.final, NormalForm):
                return False
            w = trace.final.dist
            if not _member(w, cur, True):
                return False
            grid[varying] = w
        if span_cod:
            keys = list(grid)
            for i in range(len(keys)):
                for j in range(i + 1, len(keys)):
                    ip = inner_product(grid[keys[i]], grid[keys[j]])
                    if not sc_is_zero(ip):
                        return False
        else:
            # single-axis pair combinations are images of realizable
            # arguments and must stay inside the product
            for pos in range(len(sharp_axes)):
                for base in grid:
                    for other in grid:
                        if other[pos] <= base[pos]:
                            continue
                        if any(
                            other[q] != base[q]
                            for q in range(len(sharp_axes))
                            if q != pos
                        ):
                            continue
                        for ph in (1, 1j):
                            combo = add(
                                scale(half, grid[base]),
                                scale(half * ph, grid[other]),
                            )
                            if not _member(combo, cur, True):
                                return False
    if not span_cod and len(sharp_axes) > 1:
        raise Undecidable()
    return True


def realizes(t: TermDist, goal: Type, max_steps: int = 100000) -> bool:
    """A distribution realizes a type when it reduces to a value that is
    a member up to a global phase."""
    trace = evaluate(t, max_steps)
    if not isinstance(trace.final, NormalForm):
        return False
    return is_member_phase(trace.final.dist, goal)


# ---------------------------------------------------------------------------
# Subtyping: three-valued, True and False only when decided.


def subtype(a: Type, b: Type) -> Optional[bool]:
    a, b = sharp_normalize(a), sharp_normalize(b)
    if _type_eq(a, b):
        return True
    if isinstance(b, Sharp) and _type_eq(a, b.inner):
        return True
    members = finite_members(a)
    if members is not None:
        try:
            verdicts = [is_member(m, b) for m in members]
        except Undecidable:
            return None
        return all(verdicts)
    if isinstance(b, Sharp):
        ga = span_generators(a)
        gb = span_generators(b)
        if ga is not None and gb is not None:
            return all(_in_span(g, gb) for g in ga)
    if isinstance(a, Sharp) and finite_members(b) is not None:
        return False
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        if subtype(b.dom, a.dom) is True and subtype(a.cod, b.cod) is True:
            return True
        return None
    if isinstance(a, Prod) and isinstance(b, Prod):
        left = subtype(a.left, b.left)
        right = subtype(a.right, b.right)
        if left is True and right is True:
            return True
        # componentwise failure is a counterexample whenever the other
        # component is inhabited, which holds for every type formed here
        if left is False or right is False:
            return False
        return None
    return None


def orthogonal_complement_membership(v: TermDist, t: Type) -> bool:
    """Unit norm and orthogonal to every generator of the type's span."""
    gens = span_generators(t)
    if gens is None:
        raise Undecidable()
    if not sc_eq(norm(v), 1.0):
        return False
    return all(sc_is_zero(inner_product(g, v)) for g in gens)


# ---------------------------------------------------------------------------
# Rendering, kept minimal: named bases print by name, anonymous ones by
# size.  Precedence: sharp, product, arrow.


def format_type(t: Type) -> str:
    return _fmt(sharp_normalize(t), 1)


def _fmt(t: Type, prec: int) -> str:
    if isinstance(t, BasisType):
        name = t.basis.name
        return f"[{name}]" if name else f"[{{{len(t.basis.elements)}}}]"
    if isinstance(t, Sharp):
        return "#" + _fmt(t.inner, 4)
    if isinstance(t, Prod):
        s = f"{_fmt(t.left, 3)} * {_fmt(t.right, 3)}"
        return f"({s})" if prec > 2 else s
    s = f"{_fmt(t.dom, 2)} -> {_fmt(t.cod, 1)}"
    return f"({s})" if prec > 1 else s
