"""Generalized Grover search with an arbitrary unitary in place of the
Walsh-Hadamard transform.

The search operator is ``Q = -I_gamma U^dagger I_tau U``. Starting from the
basis state |gamma>, ``U Q^k |gamma>`` rotates toward |tau> in the plane
spanned by |gamma> and U^dagger|tau>, with target probability
``sin^2((2k+1) theta)`` where ``theta = arcsin|U_tau,gamma|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qlinalg import as_matrix, basis_vector, dagger, is_unitary

STATE_LABELS = ("uu", "ud", "du", "dd")

# reference U1..U3, entries +-1/2 or +-i/2
_BUILTIN_U = {
    "U1": np.array(
        [[-1, -1, -1, -1],
         [-1, 1, -1, 1],
         [-1, -1, 1, 1],
         [-1, 1, 1, -1]],
        dtype=complex,
    ) / 2,
    "U2": np.array(
        [[1, 1, 1, 1],
         [-1, 1, -1, 1],
         [-1, -1, 1, 1],
         [1, -1, -1, 1]],
        dtype=complex,
    ) / 2,
    "U3": np.array(
        [[1, 1j, 1j, -1],
         [1j, 1, -1, 1j],
         [1j, -1, 1, 1j],
         [-1, 1j, 1j, 1]],
        dtype=complex,
    ) / 2,
}


class UnreachableTargetError(ValueError):
    pass


def state_index(label: str) -> int:
    try:
        return STATE_LABELS.index(label)
    except ValueError:
        raise ValueError(
            f"unknown basis state {label!r}; expected one of {STATE_LABELS}"
        ) from None


def builtin_u(which: str) -> np.ndarray:
    try:
        return _BUILTIN_U[which].copy()
    except KeyError:
        raise ValueError(f"unknown built-in unitary {which!r}") from None


@dataclass(frozen=True)
class SearchProblem:
    u: np.ndarray
    gamma_index: int
    tau_index: int

    def __post_init__(self):
        u = as_matrix(self.u)
        if u.shape[0] != u.shape[1]:
            raise ValueError(f"U must be square, got {u.shape}")
        if not is_unitary(u):
            raise ValueError("U is not unitary within 1e-10")
        n = u.shape[0]
        for name in ("gamma_index", "tau_index"):
            i = getattr(self, name)
            if not 0 <= i < n:
                raise IndexError(f"{name}={i} out of range for dimension {n}")
        u = u.copy()
        u.flags.writeable = False
        object.__setattr__(self, "u", u)

    @property
    def dim(self) -> int:
        return self.u.shape[0]

    @property
    def amplitude(self) -> complex:
        """The matrix element <tau|U|gamma>."""
        return complex(self.u[self.tau_index, self.gamma_index])


@dataclass(frozen=True)
class SearchReport:
    amplitude_tau_gamma: complex
    k_opt: int
    success_probability: float
    final_state: np.ndarray
    per_iteration_probabilities: list[float] = field(default_factory=list)

    @property
    def most_likely_index(self) -> int:
        return int(np.argmax(np.abs(self.final_state) ** 2))


def reflection(i: int, n: int) -> np.ndarray:
    """Diagonal reflection 1 - 2|i><i|."""
    if not 0 <= i < n:
        raise IndexError(f"reflection index {i} out of range for dimension {n}")
    d = np.ones(n, dtype=complex)
    d[i] = -1.0
    return np.diag(d)


def grover_q(p: SearchProblem) -> np.ndarray:
    n = p.dim
    u = p.u
    return -reflection(p.gamma_index, n) @ dagger(u) @ reflection(p.tau_index, n) @ u


def rotation_angle(amplitude: float) -> float:
    a = abs(amplitude)
    if a == 0.0:
        raise UnreachableTargetError("target unreachable from source under U")
    return math.asin(min(a, 1.0))


def k_opt_for_amplitude(amplitude: float) -> int:
    theta = rotation_angle(amplitude)
    x = (math.pi / 2 - theta) / (2 * theta)
    # nearest integer, exact halves go down (smaller k wins ties)
    return max(0, math.ceil(x - 0.5))


def predicted_probability(amplitude: float, k: int) -> float:
    theta = rotation_angle(amplitude)
    return math.sin((2 * k + 1) * theta) ** 2


def iteration_count(p: SearchProblem) -> int:
    return k_opt_for_amplitude(abs(p.amplitude))


def run_search(p: SearchProblem, k: int | None = None) -> SearchReport:
    if k is None:
        k = iteration_count(p)
    if k < 0:
        raise ValueError("iteration count must be nonnegative")
    q = grover_q(p)
    state = basis_vector(p.gamma_index, p.dim)
    probs = []
    for j in range(k + 1):
        if j:
            state = q @ state
        probs.append(float(abs((p.u @ state)[p.tau_index]) ** 2))
    final = p.u @ state
    return SearchReport(
        amplitude_tau_gamma=p.amplitude,
        k_opt=k,
        success_probability=float(abs(final[p.tau_index]) ** 2),
        final_state=final,
        per_iteration_probabilities=probs,
    )


def unitary_with_amplitude(amp: float, dim: int = 4, gamma: int = 0,
                           tau: int | None = None) -> np.ndarray:
    """Build a Householder unitary with ``|<tau|U|gamma>| = amp``.

    The column U|gamma> puts amplitude ``amp`` on |tau> and spreads the
    remaining weight evenly over the other basis states.
    """
    if not 0.0 <= amp <= 1.0:
        raise ValueError("amplitude must lie in [0, 1]")
    if dim < 2:
        raise ValueError("need dim >= 2")
    if tau is None:
        tau = dim - 1 if gamma != dim - 1 else 0
    v = np.full(dim, math.sqrt((1.0 - amp**2) / (dim - 1)), dtype=complex)
    v[tau] = amp
    w = basis_vector(gamma, dim) - v
    nw = np.vdot(w, w).real
    if nw < 1e-30:
        return np.eye(dim, dtype=complex)
    return np.eye(dim, dtype=complex) - 2.0 * np.outer(w, np.conj(w)) / nw
