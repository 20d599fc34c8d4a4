"""Independent reference computations for the test-suite.

Nothing here imports the code under test. Matrices are lists of lists of
Python complex numbers, or (for the FID oracle) numpy/scipy built from
explicit Pauli matrices with a general-purpose ``expm``.
"""

import math

import numpy as np
from scipy.linalg import expm


def mm(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))]
            for i in range(len(a))]


def dag(a):
    return [[complex(a[j][i]).conjugate() for j in range(len(a))] for i in range(len(a[0]))]


def refl(i, n):
    return [[(-1 if r == c == i else (1 if r == c else 0)) for c in range(n)] for r in range(n)]


def neg(a):
    return [[-x for x in row] for row in a]


def to_lists(m):
    return [[complex(x) for x in row] for row in np.asarray(m)]


def grover_q(u, gamma, tau):
    n = len(u)
    return neg(mm(mm(mm(refl(gamma, n), dag(u)), refl(tau, n)), u))


def target_probabilities(u, gamma, tau, kmax):
    """|<tau| U Q^k |gamma>|^2 for k = 0..kmax by repeated multiplication."""
    u = to_lists(u)
    q = grover_q(u, gamma, tau)
    n = len(u)
    state = [[1 if i == gamma else 0] for i in range(n)]
    out = []
    for _ in range(kmax + 1):
        out.append(abs(mm(u, state)[tau][0]) ** 2)
        state = mm(q, state)
    return out


def one_period(theta):
    """Largest k such that [0, k] stays inside one rotation period."""
    return math.floor(math.pi / (2 * theta))


def first_period_argmax(probs, theta, window=None, tie=1e-9):
    """Brute-force argmax over k <= window (default: one rotation period).

    Ties within ``tie`` go to the smaller k.
    """
    if window is None:
        window = one_period(theta)
    best_k, best_p = 0, probs[0]
    for k in range(1, min(window, len(probs) - 1) + 1):
        if probs[k] > best_p + tie:
            best_k, best_p = k, probs[k]
    return best_k


# explicit two-spin operators for the FID oracle
PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def op(k, axis):
    s = PAULI[axis] / 2
    return np.kron(s, np.eye(2)) if k == 1 else np.kron(np.eye(2), s)


def fid_by_propagation(rho, k, j, n, dwell, t2):
    """FID from step-by-step propagation with a general matrix exponential."""
    readout = expm(-1j * (math.pi / 2) * op(k, "y"))
    r = readout @ rho @ readout.conj().T
    h = 2 * math.pi * j * op(1, "z") @ op(2, "z")
    step = expm(-1j * h * dwell)
    obs = op(k, "x") + 1j * op(k, "y")
    out = np.empty(n, dtype=complex)
    for i in range(n):
        out[i] = np.trace(r @ obs) * math.exp(-i * dwell / t2)
        r = step @ r @ step.conj().T
    return out
