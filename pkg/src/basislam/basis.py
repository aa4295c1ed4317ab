"""Qubit distributions and orthonormal bases.

An n-qubit value is a distribution whose support consists of
right-associated length-n ket tuples and whose norm is 1.  A basis is a
family of same-arity qubits that is pairwise orthogonal and unit norm; it
may span only part of the 2**n dimensional space.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .core import (
    EPS,
    Ket,
    Ortho,
    Pair,
    PureTerm,
    TermDist,
    add,
    inner_product,
    mk_pair,
    norm,
    scale,
    sc_eq,
    sc_is_zero,
    single,
    sub,
)

_SQ2 = 2 ** -0.5


def ket_bits(t: PureTerm) -> Optional[str]:
    """Bit string of a right-associated ket tuple, else None."""
    if isinstance(t, Ket):
        return str(t.bit)
    if isinstance(t, Pair) and isinstance(t.left, Ket):
        rest = ket_bits(t.right)
        if rest is not None:
            return str(t.left.bit) + rest
    return None


def multi_ket(bits: str) -> TermDist:
    if not bits or any(b not in "01" for b in bits):
        raise ValueError(f"bad ket string: {bits!r}")
    out = single(Ket(int(bits[-1])))
    for b in reversed(bits[:-1]):
        out = mk_pair(single(Ket(int(b))), out)
    return out


def qubit_arity(d: TermDist) -> Optional[int]:
    """Number of qubits if d is a qubit distribution, else None."""
    if d.is_zero():
        return None
    n: Optional[int] = None
    for t, _ in d.entries:
        bits = ket_bits(t)
        if bits is None:
            return None
        if n is None:
            n = len(bits)
        elif n != len(bits):
            return None
    if not sc_eq(norm(d), 1.0):
        return None
    return n


def is_qubit(d: TermDist) -> bool:
    return qubit_arity(d) is not None


def to_vector(d: TermDist, n: int) -> np.ndarray:
    """Coordinates of a ket-supported distribution in the computational
    basis, leftmost ket bit most significant."""
    vec = np.zeros(2 ** n, dtype=complex)
    for t, c in d.entries:
        bits = ket_bits(t)
        if bits is None or len(bits) != n:
            raise ValueError("support is not length-n ket tuples")
        vec[int(bits, 2)] += c
    return vec


def from_vector(vec: np.ndarray, n: int) -> TermDist:
    if len(vec) != 2 ** n:
        raise ValueError("vector length must be 2**n")
    parts = []
    for i, c in enumerate(vec):
        if not sc_is_zero(c):
            parts.append(scale(complex(c), multi_ket(format(i, f"0{n}b"))))
    return add(*parts)


class BasisError(ValueError):
    pass


def validate_basis(b: Ortho) -> int:
    """Check the orthonormal-family-of-qubits conditions; return the
    common arity."""
    if not b.elements:
        raise BasisError("basis must be nonempty")
    arity: Optional[int] = None
    for i, e in enumerate(b.elements):
        n = qubit_arity(e)
        if n is None:
            raise BasisError(f"basis element {i} is not a qubit value")
        if arity is None:
            arity = n
        elif arity != n:
            raise BasisError("basis elements have mixed arities")
    assert arity is not None
    if len(b.elements) > 2 ** arity:
        raise BasisError("more elements than the space has dimensions")
    for i in range(len(b.elements)):
        for j in range(i + 1, len(b.elements)):
            ip = inner_product(b.elements[i], b.elements[j])
            if not sc_is_zero(ip):
                raise BasisError(f"basis elements {i} and {j} not orthogonal")
    return arity


def basis_arity(b: Ortho) -> int:
    n = qubit_arity(b.elements[0])
    if n is None:
        raise BasisError("basis element 0 is not a qubit value")
    return n


def decompose(
    v: TermDist, b: Ortho, eps: Optional[float] = None
) -> Optional[list[complex]]:
    """Coefficients of v over b, or None when v has a component outside
    the span (residual norm above eps)."""
    tol = EPS if eps is None else eps
    coeffs = [inner_product(e, v) for e in b.elements]
    residual = v
    for c, e in zip(coeffs, b.elements):
        residual = sub(residual, scale(c, e))
    if norm(residual) > tol:
        return None
    return coeffs


def in_span(v: TermDist, b: Ortho, eps: Optional[float] = None) -> bool:
    return decompose(v, b, eps) is not None


def product_basis(b1: Ortho, b2: Ortho) -> Ortho:
    """Pairwise pairs (e1, e2), left index varying slowest."""
    elems = tuple(
        mk_pair(e1, e2) for e1 in b1.elements for e2 in b2.elements
    )
    name = None
    if b1.name and b2.name:
        name = f"{b1.name}x{b2.name}"
    return Ortho(elems, name)


def _k(bits: str) -> TermDist:
    return multi_ket(bits)


KET_PLUS = add(scale(_SQ2, _k("0")), scale(_SQ2, _k("1")))
KET_MINUS = add(scale(_SQ2, _k("0")), scale(-_SQ2, _k("1")))

PHI_PLUS = add(scale(_SQ2, _k("00")), scale(_SQ2, _k("11")))
PHI_MINUS = add(scale(_SQ2, _k("00")), scale(-_SQ2, _k("11")))
PSI_PLUS = add(scale(_SQ2, _k("01")), scale(_SQ2, _k("10")))
PSI_MINUS = add(scale(_SQ2, _k("01")), scale(-_SQ2, _k("10")))

STD = Ortho((_k("0"), _k("1")), "B")
HAD = Ortho((KET_PLUS, KET_MINUS), "X")
BELL = Ortho((PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS), "Bell")

NAMED_BASES: dict[str, Ortho] = {"B": STD, "X": HAD, "Bell": BELL}


def lookup_basis(name: str) -> Ortho:
    try:
        return NAMED_BASES[name]
    except KeyError:
        raise BasisError(f"unknown basis name: {name}") from None
