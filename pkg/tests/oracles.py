"""Independent numerical references for the executable checks.

Everything here is plain state-vector algebra over numpy, written against
the textbook circuits rather than the calculus: the only package imports
are the term constructors needed to read a result back out.  Tests compare
calculus output against these functions, so a bug would have to appear in
two unrelated implementations to slip through.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    dtype=complex,
)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = H @ KET0
MINUS = H @ KET1

# Bell vectors in the order: phi+, phi-, psi+, psi-.
BELL_VECS = [
    np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2.0),
    np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2.0),
    np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2.0),
    np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2.0),
]


def kron(*parts: np.ndarray) -> np.ndarray:
    return reduce(np.kron, parts)


def oracle_unitary(f0: int, f1: int) -> np.ndarray:
    """The reversible oracle |x, y> -> |x, y xor f(x)>."""
    u = np.zeros((4, 4), dtype=complex)
    for x in (0, 1):
        fx = f0 if x == 0 else f1
        for y in (0, 1):
            u[2 * x + (y ^ fx), 2 * x + y] = 1.0
    return u


def deutsch_state(f0: int, f1: int) -> np.ndarray:
    """Final two-qubit state of the textbook constant-vs-balanced
    circuit: prepare |0>|1>, Hadamard both wires, query the oracle,
    Hadamard the first wire."""
    state = kron(KET0, KET1)
    state = kron(H, H) @ state
    state = oracle_unitary(f0, f1) @ state
    state = kron(H, I2) @ state
    return state


def deutsch_answer(f0: int, f1: int) -> int:
    return f0 ^ f1


def first_wire(state: np.ndarray) -> np.ndarray:
    """The first-wire factor of a two-qubit product state; raises if the
    state is entangled."""
    m = state.reshape(2, 2)
    u, s, vh = np.linalg.svd(m)
    if s[1] > 1e-9:
        raise ValueError("state is not a product")
    return u[:, 0] * s[0]


def teleport_state(psi: np.ndarray) -> np.ndarray:
    """Deferred-measurement teleportation on wires (payload, epr1, epr2):
    entangle nothing by circuit, project the first two wires on the Bell
    family while applying the matching correction to the third."""
    state = kron(psi, BELL_VECS[0])
    corrections = [I2, Z, X, Z @ X]
    op = sum(
        kron(np.outer(b, b.conj()), u)
        for b, u in zip(BELL_VECS, corrections)
    )
    return op @ state


def teleport_expected(psi: np.ndarray) -> np.ndarray:
    """The analytic answer: an even Bell mixture carrying the payload."""
    return sum(kron(b, psi) for b in BELL_VECS) / 2.0


def random_unit(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def dist_vector(d, n: int) -> np.ndarray:
    """Coordinates of a normal form built from kets and pairs, leftmost
    wire slowest.  A deliberate reimplementation: it walks the term
    directly instead of going through the package converter."""
    from basislam.core import Ket, Pair

    def bits(t) -> list[int]:
        if isinstance(t, Ket):
            return [t.bit]
        if isinstance(t, Pair):
            return bits(t.left) + bits(t.right)
        raise ValueError(f"not a ket pair: {t!r}")

    vec = np.zeros(2**n, dtype=complex)
    for t, c in d.entries:
        bs = bits(t)
        if len(bs) != n:
            raise ValueError(f"expected {n} wires, found {len(bs)}")
        idx = 0
        for b in bs:
            idx = idx * 2 + b
        vec[idx] += c
    return vec


def in_span_lstsq(v: np.ndarray, basis: list[np.ndarray]) -> bool:
    """Span membership by least squares, independent of the package's
    Gram-based decomposition."""
    a = np.stack(basis, axis=1)
    coeffs, *_ = np.linalg.lstsq(a, v, rcond=None)
    return bool(np.linalg.norm(a @ coeffs - v) <= 1e-8)
