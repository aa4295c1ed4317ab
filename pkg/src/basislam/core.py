"""Canonical complex-linear distributions of lambda terms.

A term distribution is a finite formal sum of pure terms with complex
coefficients, kept in a canonical form: coefficients of equal pure terms
merged, near-zero entries dropped, entries sorted by a fixed total order
on pure terms.  All vector-space rewrites (scalar folding, bilinearity of
application and pairing, linearity of let/case in the scrutinee) happen
in the smart constructors, so two expressions related by those rewrites
build the identical canonical object.  Sums are never moved through a
lambda body, a case branch, or a let body: a superposition of results is
not a superposition of functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union

# Tolerance for scalar equality, zero pruning, orthogonality and norm
# checks.  One knob for the whole package (CLI --eps writes it).
EPS = 1e-9


def set_eps(value: float) -> None:
    global EPS
    if value <= 0:
        raise ValueError("eps must be positive")
    EPS = float(value)


def sc_eq(a: complex, b: complex, eps: Optional[float] = None) -> bool:
    return abs(a - b) <= (EPS if eps is None else eps)


def sc_is_zero(a: complex, eps: Optional[float] = None) -> bool:
    return abs(a) <= (EPS if eps is None else eps)


# ---------------------------------------------------------------------------
# Basis annotations.
#
# A binder is annotated either with AbsBasis (substitution proceeds pure
# value by pure value; used for function-position binders) or with an
# orthonormal family of closed value distributions.  Validation of
# orthonormality lives in basis.py; these classes are plain structure.


@dataclass(frozen=True, eq=False)
class AbsBasis:
    def __repr__(self) -> str:
        return "AbsBasis"


ABS = AbsBasis()


@dataclass(frozen=True, eq=False)
class Ortho:
    elements: tuple["TermDist", ...]
    name: Optional[str] = None  # display only, ignored by comparisons

    def __repr__(self) -> str:
        return f"Ortho({self.name or len(self.elements)})"


Basis = Union[AbsBasis, Ortho]


# ---------------------------------------------------------------------------
# Pure terms.  Children that the congruence would pull sums out of are
# pure terms; children it never rewrites under (lambda bodies, let bodies,
# case branches) stay full distributions.


@dataclass(frozen=True, eq=False)
class Var:
    name: str


@dataclass(frozen=True, eq=False)
class Ket:
    bit: int  # 0 or 1

    def __post_init__(self):
        object.__setattr__(self, "bit", int(self.bit))
        if self.bit not in (0, 1):
            raise ValueError("ket bit must be 0 or 1")


@dataclass(frozen=True, eq=False)
class Lam:
    var: str
    basis: Basis
    body: "TermDist"


@dataclass(frozen=True, eq=False)
class Pair:
    left: "PureTerm"
    right: "PureTerm"


@dataclass(frozen=True, eq=False)
class App:
    fun: "PureTerm"
    arg: "PureTerm"


@dataclass(frozen=True, eq=False)
class LetPair:
    var1: str
    basis1: Basis
    var2: str
    basis2: Basis
    scrutinee: "PureTerm"
    body: "TermDist"


@dataclass(frozen=True, eq=False)
class Case:
    scrutinee: "PureTerm"
    patterns: tuple["TermDist", ...]
    branches: tuple["TermDist", ...]


PureTerm = Union[Var, Ket, Lam, Pair, App, LetPair, Case]

_RANK = {Ket: 0, Var: 1, Pair: 2, Lam: 3, App: 4, LetPair: 5, Case: 6}


# ---------------------------------------------------------------------------
# Term distributions.


@dataclass(frozen=True, eq=False)
class TermDist:
    """Canonical map from pure terms to nonzero complex coefficients."""

    entries: tuple[tuple[PureTerm, complex], ...]

    def __iter__(self) -> Iterator[tuple[PureTerm, complex]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def is_zero(self) -> bool:
        return not self.entries

    def terms(self) -> tuple[PureTerm, ...]:
        return tuple(t for t, _ in self.entries)

    def __repr__(self) -> str:
        return f"TermDist({len(self.entries)} entries)"


ValueDist = TermDist  # a TermDist whose support is pure values


# ---------------------------------------------------------------------------
# Total order on pure terms.  Keys are nested tuples; ranks separate
# constructors, payloads only ever compare within one constructor.
# Variables are keyed by name (free and bound alike); the order is a fixed
# deterministic convention, not alpha-invariant, which is fine because all
# semantic comparisons below match entries pairwise rather than by
# position.


def _basis_key(b: Basis):
    if isinstance(b, AbsBasis):
        return (0, ())
    return (1, tuple(_dist_key(e) for e in b.elements))


def _term_key(t: PureTerm):
    if isinstance(t, Ket):
        return (0, (t.bit,), ())
    if isinstance(t, Var):
        return (1, (t.name,), ())
    if isinstance(t, Pair):
        return (2, (), (_term_key(t.left), _term_key(t.right)))
    if isinstance(t, Lam):
        return (3, (t.var, _basis_key(t.basis)), (_dist_key(t.body),))
    if isinstance(t, App):
        return (4, (), (_term_key(t.fun), _term_key(t.arg)))
    if isinstance(t, LetPair):
        return (
            5,
            (t.var1, _basis_key(t.basis1), t.var2, _basis_key(t.basis2)),
            (_term_key(t.scrutinee), _dist_key(t.body)),
        )
    if isinstance(t, Case):
        return (
            6,
            (len(t.patterns),),
            (_term_key(t.scrutinee),)
            + tuple(_dist_key(p) for p in t.patterns)
            + tuple(_dist_key(b) for b in t.branches),
        )
    raise TypeError(f"not a pure term: {t!r}")


def _dist_key(d: TermDist):
    return tuple((_term_key(t), (c.real, c.imag)) for t, c in d.entries)


# ---------------------------------------------------------------------------
# Alpha-respecting comparison.  Bound variables are compared by binding
# position, free variables by name; scalars exactly or within EPS.


class _Env:
    __slots__ = ("map", "parent")

    def __init__(self, parent: Optional["_Env"], name: str, level: int):
        self.map = (name, level)
        self.parent = parent

    @staticmethod
    def lookup(env: Optional["_Env"], name: str) -> Optional[int]:
        while env is not None:
            if env.map[0] == name:
                return env.map[1]
            env = env.parent
        return None


def _sc_cmp(a: complex, b: complex, exact: bool, eps: float) -> bool:
    if exact:
        return a == b
    return abs(a - b) <= eps


def _basis_eq(a: Basis, b: Basis, exact: bool, eps: float) -> bool:
    if isinstance(a, AbsBasis) or isinstance(b, AbsBasis):
        return isinstance(a, AbsBasis) and isinstance(b, AbsBasis)
    if len(a.elements) != len(b.elements):
        return False
    return all(
        _dist_eq(x, y, None, None, 0, exact, eps)
        for x, y in zip(a.elements, b.elements)
    )


def _term_eq(
    a: PureTerm,
    b: PureTerm,
    ea: Optional[_Env],
    eb: Optional[_Env],
    depth: int,
    exact: bool,
    eps: float,
) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Ket):
        return a.bit == b.bit
    if isinstance(a, Var):
        la, lb = _Env.lookup(ea, a.name), _Env.lookup(eb, b.name)
        if la is None and lb is None:
            return a.name == b.name
        return la == lb
    if isinstance(a, Pair):
        return _term_eq(a.left, b.left, ea, eb, depth, exact, eps) and _term_eq(
            a.right, b.right, ea, eb, depth, exact, eps
        )
    if isinstance(a, App):
        return _term_eq(a.fun, b.fun, ea, eb, depth, exact, eps) and _term_eq(
            a.arg, b.arg, ea, eb, depth, exact, eps
        )
    if isinstance(a, Lam):
        if not _basis_eq(a.basis, b.basis, exact, eps):
            return False
        return _dist_eq(
            a.body,
            b.body,
            _Env(ea, a.var, depth),
            _Env(eb, b.var, depth),
            depth + 1,
            exact,
            eps,
        )
    if isinstance(a, LetPair):
        if not (
            _basis_eq(a.basis1, b.basis1, exact, eps)
            and _basis_eq(a.basis2, b.basis2, exact, eps)
        ):
            return False
        if not _term_eq(a.scrutinee, b.scrutinee, ea, eb, depth, exact, eps):
            return False
        return _dist_eq(
            a.body,
            b.body,
            _Env(_Env(ea, a.var1, depth), a.var2, depth + 1),
            _Env(_Env(eb, b.var1, depth), b.var2, depth + 1),
            depth + 2,
            exact,
            eps,
        )
    if isinstance(a, Case):
        if len(a.patterns) != len(b.patterns):
            return False
        if not _term_eq(a.scrutinee, b.scrutinee, ea, eb, depth, exact, eps):
            return False
        for pa, pb in zip(a.patterns, b.patterns):
            if not _dist_eq(pa, pb, None, None, 0, exact, eps):
                return False
        for ba, bb in zip(a.branches, b.branches):
            if not _dist_eq(ba, bb, ea, eb, depth, exact, eps):
                return False
        return True
    raise TypeError(f"not a pure term: {a!r}")


def _dist_eq(
    a: TermDist,
    b: TermDist,
    ea: Optional[_Env],
    eb: Optional[_Env],
    depth: int,
    exact: bool,
    eps: float,
) -> bool:
    if len(a.entries) != len(b.entries):
        return False
    used = [False] * len(b.entries)
    for ta, ca in a.entries:
        hit = False
        for j, (tb, cb) in enumerate(b.entries):
            if used[j]:
                continue
            if _sc_cmp(ca, cb, exact, eps) and _term_eq(ta, tb, ea, eb, depth, exact, eps):
                used[j] = True
                hit = True
                break
        if not hit:
            return False
    return True


def term_eq(a: PureTerm, b: PureTerm, eps: Optional[float] = None) -> bool:
    """Alpha-respecting equality with scalar tolerance (the Kronecker
    delta used by the inner product)."""
    return _term_eq(a, b, None, None, 0, False, EPS if eps is None else eps)


def term_eq_exact(a: PureTerm, b: PureTerm) -> bool:
    return _term_eq(a, b, None, None, 0, True, 0.0)


def dist_eq(a: TermDist, b: TermDist, eps: Optional[float] = None) -> bool:
    return _dist_eq(a, b, None, None, 0, False, EPS if eps is None else eps)


def dist_eq_exact(a: TermDist, b: TermDist) -> bool:
    return _dist_eq(a, b, None, None, 0, True, 0.0)


def basis_eq(a: Basis, b: Basis, eps: Optional[float] = None) -> bool:
    return _basis_eq(a, b, False, EPS if eps is None else eps)


# ---------------------------------------------------------------------------
# Free variables and closedness.


def free_vars(t: Union[PureTerm, TermDist]) -> frozenset[str]:
    if isinstance(t, TermDist):
        out: frozenset[str] = frozenset()
        for u, _ in t.entries:
            out |= free_vars(u)
        return out
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Ket):
        return frozenset()
    if isinstance(t, Pair):
        return free_vars(t.left) | free_vars(t.right)
    if isinstance(t, App):
        return free_vars(t.fun) | free_vars(t.arg)
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.var}
    if isinstance(t, LetPair):
        return free_vars(t.scrutinee) | (free_vars(t.body) - {t.var1, t.var2})
    if isinstance(t, Case):
        out = free_vars(t.scrutinee)
        for b in t.branches:
            out |= free_vars(b)
        return out
    raise TypeError(f"not a term: {t!r}")


def is_closed(t: Union[PureTerm, TermDist]) -> bool:
    return not free_vars(t)


def is_pure_value(t: PureTerm) -> bool:
    if isinstance(t, (Var, Ket, Lam)):
        return True
    if isinstance(t, Pair):
        return is_pure_value(t.left) and is_pure_value(t.right)
    return False


def is_value_dist(d: TermDist) -> bool:
    return all(is_pure_value(t) for t, _ in d.entries)


# ---------------------------------------------------------------------------
# Canonical construction.


def _build(pairs: Iterable[tuple[PureTerm, complex]]) -> TermDist:
    merged: list[tuple[PureTerm, complex]] = []
    for t, c in pairs:
        if c == 0:
            continue
        for i, (u, d) in enumerate(merged):
            if term_eq(t, u):
                merged[i] = (u, d + c)
                break
        else:
            merged.append((t, complex(c)))
    pruned = [(t, c) for t, c in merged if not sc_is_zero(c)]
    pruned.sort(key=lambda e: _term_key(e[0]))
    return TermDist(tuple(pruned))


def zero() -> TermDist:
    return TermDist(())


def single(t: PureTerm) -> TermDist:
    return TermDist(((t, 1 + 0j),))


def scale(c: complex, d: TermDist) -> TermDist:
    if sc_is_zero(c):
        return zero()
    return _build((t, c * a) for t, a in d.entries)


def add(*dists: TermDist) -> TermDist:
    pairs: list[tuple[PureTerm, complex]] = []
    for d in dists:
        pairs.extend(d.entries)
    return _build(pairs)


def sub(a: TermDist, b: TermDist) -> TermDist:
    return add(a, scale(-1, b))


def mk_pair(left: TermDist, right: TermDist) -> TermDist:
    return _build(
        (Pair(t, s), a * b) for t, a in left.entries for s, b in right.entries
    )


def mk_app(fun: TermDist, arg: TermDist) -> TermDist:
    return _build(
        (App(t, s), a * b) for t, a in fun.entries for s, b in arg.entries
    )


def mk_lam(var: str, basis: Basis, body: TermDist) -> TermDist:
    return single(Lam(var, basis, body))


def mk_letpair(
    var1: str,
    basis1: Basis,
    var2: str,
    basis2: Basis,
    scrutinee: TermDist,
    body: TermDist,
) -> TermDist:
    if var1 == var2:
        raise ValueError("let pair binders must be distinct")
    return _build(
        (LetPair(var1, basis1, var2, basis2, t, body), c)
        for t, c in scrutinee.entries
    )


def validate_case_patterns(patterns: tuple[TermDist, ...]) -> None:
    if not patterns:
        raise ValueError("case needs at least one pattern")
    for p in patterns:
        if p.is_zero() or not is_value_dist(p):
            raise ValueError("case patterns must be value distributions")
        if not is_closed(p):
            raise ValueError("case patterns must be closed")
        if not sc_eq(norm(p), 1.0):
            raise ValueError("case patterns must have norm 1")
    for i in range(len(patterns)):
        for j in range(i + 1, len(patterns)):
            if not sc_is_zero(inner_product(patterns[i], patterns[j])):
                raise ValueError(
                    f"case patterns {i} and {j} are not orthogonal"
                )


def mk_case(
    scrutinee: TermDist,
    patterns: Iterable[TermDist],
    branches: Iterable[TermDist],
) -> TermDist:
    pats = tuple(patterns)
    brs = tuple(branches)
    if len(pats) != len(brs):
        raise ValueError("case needs one branch per pattern")
    validate_case_patterns(pats)
    return _build((Case(t, pats, brs), c) for t, c in scrutinee.entries)


# ---------------------------------------------------------------------------
# Raw syntax trees: explicit +, scalar multiple, 0 over the term formers.
# The parser produces these; canonicalize folds them into a TermDist.


@dataclass(frozen=True, eq=False)
class RZero:
    pass


@dataclass(frozen=True, eq=False)
class RVar:
    name: str


@dataclass(frozen=True, eq=False)
class RKet:
    bit: int


@dataclass(frozen=True, eq=False)
class RScale:
    coeff: complex
    sub: "Raw"


@dataclass(frozen=True, eq=False)
class RAdd:
    left: "Raw"
    right: "Raw"


@dataclass(frozen=True, eq=False)
class RPair:
    left: "Raw"
    right: "Raw"


@dataclass(frozen=True, eq=False)
class RApp:
    fun: "Raw"
    arg: "Raw"


@dataclass(frozen=True, eq=False)
class RLam:
    var: str
    basis: Basis
    body: "Raw"


@dataclass(frozen=True, eq=False)
class RLetPair:
    var1: str
    basis1: Basis
    var2: str
    basis2: Basis
    scrutinee: "Raw"
    body: "Raw"


@dataclass(frozen=True, eq=False)
class RCase:
    scrutinee: "Raw"
    patterns: tuple["Raw", ...]
    branches: tuple["Raw", ...]


Raw = Union[
    RZero, RVar, RKet, RScale, RAdd, RPair, RApp, RLam, RLetPair, RCase
]


def canonicalize(e: Raw) -> TermDist:
    if isinstance(e, RZero):
        return zero()
    if isinstance(e, RVar):
        return single(Var(e.name))
    if isinstance(e, RKet):
        return single(Ket(e.bit))
    if isinstance(e, RScale):
        return scale(e.coeff, canonicalize(e.sub))
    if isinstance(e, RAdd):
        return add(canonicalize(e.left), canonicalize(e.right))
    if isinstance(e, RPair):
        return mk_pair(canonicalize(e.left), canonicalize(e.right))
    if isinstance(e, RApp):
        return mk_app(canonicalize(e.fun), canonicalize(e.arg))
    if isinstance(e, RLam):
        return mk_lam(e.var, e.basis, canonicalize(e.body))
    if isinstance(e, RLetPair):
        return mk_letpair(
            e.var1,
            e.basis1,
            e.var2,
            e.basis2,
            canonicalize(e.scrutinee),
            canonicalize(e.body),
        )
    if isinstance(e, RCase):
        return mk_case(
            canonicalize(e.scrutinee),
            tuple(canonicalize(p) for p in e.patterns),
            tuple(canonicalize(b) for b in e.branches),
        )
    raise TypeError(f"not a raw expression: {e!r}")


def recanonicalize(d: TermDist) -> TermDist:
    """Rebuild a distribution through the canonical constructors (used by
    the idempotence checks; a no-op on canonical input)."""
    return _build(d.entries)


# ---------------------------------------------------------------------------
# Inner product, norm, global phase.


def inner_product(v: TermDist, w: TermDist, eps: Optional[float] = None) -> complex:
    """Sesquilinear (conjugate in the first argument); the delta on pure
    terms is alpha-respecting syntactic equality of canonical forms."""
    acc = 0 + 0j
    for t, a in v.entries:
        for s, b in w.entries:
            if _term_eq(t, s, None, None, 0, False, EPS if eps is None else eps):
                acc += a.conjugate() * b
    return acc


def norm(v: TermDist) -> float:
    sq = inner_product(v, v)
    # self inner product is real up to rounding
    return math.sqrt(max(sq.real, 0.0))


def phase_normalize(v: TermDist) -> tuple[TermDist, complex]:
    """Divide out the phase of the leading coefficient; returns the
    normalized distribution and the unit phase that was removed, so that
    v = phase * result."""
    if v.is_zero():
        raise ValueError("cannot phase-normalize the zero distribution")
    lead = v.entries[0][1]
    phase = lead / abs(lead)
    return scale(phase.conjugate(), v), phase
