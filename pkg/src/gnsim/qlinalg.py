"""Small dense complex linear algebra used throughout the simulator.

Matrices and vectors are plain ``numpy`` arrays of dtype ``complex128``.
Basis ordering for two spins is |uu>, |ud>, |du>, |dd> with spin 1 as the
left tensor factor.

Only two kinds of matrix exponential are ever needed: exponentials of
diagonal generators and single-spin rotations, both evaluated in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12

SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
ID2 = np.eye(2, dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def basis_vector(i: int, n: int) -> np.ndarray:
    if not 0 <= i < n:
        raise IndexError(f"basis index {i} out of range for dimension {n}")
    v = np.zeros(n, dtype=complex)
    v[i] = 1.0
    return v


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def max_norm(m) -> float:
    """Entrywise max-modulus norm."""
    a = np.asarray(m)
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_unitary(m, tol: float = UNITARY_TOL) -> bool:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    return max_norm(dagger(a) @ a - np.eye(a.shape[0])) <= tol


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    a = as_matrix(m)
    return a.shape[0] == a.shape[1] and max_norm(a - dagger(a)) <= tol


def is_normalized(v, tol: float = NORM_TOL) -> bool:
    return abs(float(np.sum(np.abs(np.asarray(v)) ** 2)) - 1.0) <= tol


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def matmul_chain(ms: Sequence) -> np.ndarray:
    """Multiply ``ms[0] @ ms[1] @ ... @ ms[-1]``.

    The leftmost list element is the leftmost factor. A dimension mismatch
    raises ``ValueError`` naming the index pair that failed to conform.
    """
    if len(ms) == 0:
        raise ValueError("matmul_chain needs at least one matrix")
    mats = [as_matrix(m) for m in ms]
    for i in range(len(mats) - 1):
        if mats[i].shape[1] != mats[i + 1].shape[0]:
            raise ValueError(
                f"dimension mismatch between factors {i} and {i + 1}: "
                f"{mats[i].shape} x {mats[i + 1].shape}"
            )
    return reduce(np.matmul, mats)


@dataclass(frozen=True)
class PhaseMatch:
    """Outcome of a global-phase comparison.

    Truthy iff the matrices agree up to a global phase. ``phase`` is the
    aligning angle (``None`` when undefined) and ``orthogonal`` flags the
    case tr(b^dagger a) = 0 where no phase can be extracted.
    """

    equal: bool
    phase: float | None
    orthogonal: bool = False

    def __bool__(self) -> bool:
        return self.equal


def equal_up_to_global_phase(a, b, tol: float = UNITARY_TOL) -> PhaseMatch:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if max_norm(b) == 0.0:
        raise ValueError("reference matrix is all zero")
    overlap = np.trace(dagger(b) @ a)
    if abs(overlap) <= 1e-14 * max(1.0, a.size):
        if max_norm(a) == 0.0:
            return PhaseMatch(False, None)
        return PhaseMatch(False, None, orthogonal=True)
    phi = float(np.angle(overlap))
    ok = max_norm(a - np.exp(1j * phi) * b) <= tol
    return PhaseMatch(bool(ok), phi)


def exp_diag_generator(d, scalar: float) -> np.ndarray:
    """Return exp(-i * scalar * d) for a diagonal Hermitian ``d``."""
    d = as_matrix(d)
    diag = np.diag(d)
    if max_norm(d - np.diag(diag)) != 0.0:
        raise ValueError("generator is not diagonal")
    if np.any(np.abs(diag.imag) > HERMITIAN_TOL):
        raise ValueError("generator is not Hermitian")
    return np.diag(np.exp(-1j * scalar * diag.real))


def exp_su2(axis: str, phi: float) -> np.ndarray:
    """Single-spin rotation exp(i * phi * sigma_axis / 2) in closed form."""
    try:
        sigma = SIGMA[axis]
    except KeyError:
        raise ValueError(f"unknown rotation axis {axis!r}") from None
    return np.cos(phi / 2) * ID2 + 1j * np.sin(phi / 2) * sigma
