import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnsim import qlinalg as ql
from gnsim.search_core import builtin_u, reflection

h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
angles = st.floats(min_value=-4 * math.pi, max_value=4 * math.pi, allow_nan=False)


def test_kron_identity():
    assert np.array_equal(ql.kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_iz1_basis_order():
    got = ql.kron(ql.SIGMA["z"] / 2, np.eye(2))
    assert np.allclose(got, np.diag([1, 1, -1, -1]) / 2, atol=0)


def test_kron_hadamard_is_minus_u1():
    assert ql.max_norm(ql.kron(h, h) + builtin_u("U1")) < 1e-15


def test_matmul_chain_cases():
    assert np.array_equal(ql.matmul_chain([np.eye(4)]), np.eye(4))
    i3 = reflection(3, 4)
    assert np.array_equal(ql.matmul_chain([i3, i3]), np.eye(4))
    u2 = builtin_u("U2")
    assert ql.max_norm(ql.matmul_chain([ql.dagger(u2), u2]) - np.eye(4)) <= 1e-12


def test_matmul_chain_order():
    a = np.array([[1, 2], [3, 4]])
    b = np.array([[0, 1], [1, 0]])
    assert np.array_equal(ql.matmul_chain([a, b]), a @ b)


def test_matmul_chain_mismatch_names_pair():
    with pytest.raises(ValueError, match="factors 1 and 2"):
        ql.matmul_chain([np.eye(2), np.eye(2), np.eye(3)])
    with pytest.raises(ValueError):
        ql.matmul_chain([])


def test_global_phase_examples():
    u3 = builtin_u("U3")
    res = ql.equal_up_to_global_phase(u3, u3 * cmath.exp(1j * math.pi / 7), 1e-10)
    assert res and res.phase == pytest.approx(-math.pi / 7)
    # a = e^{i phi} b; b = u3 e^{i pi/7}, so aligning a to b needs -pi/7.
    res = ql.equal_up_to_global_phase(u3 * cmath.exp(1j * math.pi / 7), u3, 1e-10)
    assert res and res.phase == pytest.approx(math.pi / 7)

    res = ql.equal_up_to_global_phase(builtin_u("U1"), ql.kron(h, h), 1e-10)
    assert res and abs(abs(res.phase) - math.pi) < 1e-12

    assert not ql.equal_up_to_global_phase(builtin_u("U1"), builtin_u("U2"), 1e-10)


def test_global_phase_orthogonal_flag():
    a = np.diag([1, 0]).astype(complex)
    b = np.diag([0, 1]).astype(complex)
    res = ql.equal_up_to_global_phase(a, b)
    assert not res and res.orthogonal and res.phase is None


def test_global_phase_rejects_zero_reference():
    with pytest.raises(ValueError):
        ql.equal_up_to_global_phase(np.eye(2), np.zeros((2, 2)))


def test_exp_diag_generator_examples():
    zz = np.diag([1, -1, -1, 1]) / 4
    j = 215.0
    got = ql.exp_diag_generator(zz, 2 * math.pi * j * (1 / (2 * j)))
    want = np.diag(np.exp([-1j * math.pi / 4, 1j * math.pi / 4, 1j * math.pi / 4, -1j * math.pi / 4]))
    assert ql.max_norm(got - want) < 1e-15
    assert np.array_equal(ql.exp_diag_generator(zz, 0.0), np.eye(4))
    iz1 = np.diag([1, 1, -1, -1]) / 2
    assert ql.max_norm(ql.exp_diag_generator(iz1, 2 * math.pi) + np.eye(4)) < 1e-15


def test_exp_diag_generator_rejects_offdiagonal():
    with pytest.raises(ValueError):
        ql.exp_diag_generator(ql.SIGMA["x"], 1.0)


def test_exp_su2_examples():
    r = 1 / math.sqrt(2)
    assert ql.max_norm(ql.exp_su2("y", math.pi / 2) - r * np.array([[1, 1], [-1, 1]])) < 1e-15
    assert ql.max_norm(ql.exp_su2("x", math.pi / 2) - r * np.array([[1, 1j], [1j, 1]])) < 1e-15
    assert np.array_equal(ql.exp_su2("x", 0.0), np.eye(2))


def test_exp_su2_matches_series_free_reference():
    # independent: eigen-decomposition of sigma/2
    from scipy.linalg import expm
    for axis in "xy":
        for phi in (0.3, -1.7, 2 * math.pi + 0.1):
            ref = expm(1j * phi * ql.SIGMA[axis] / 2)
            assert ql.max_norm(ql.exp_su2(axis, phi) - ref) < 1e-13


def test_predicates():
    assert ql.is_unitary(builtin_u("U3"))
    assert not ql.is_unitary(2 * np.eye(2))
    assert ql.is_hermitian(ql.SIGMA["y"])
    assert not ql.is_hermitian(1j * np.eye(2))
    assert ql.is_normalized(np.array([0.6, 0.8j]))
    assert not ql.is_normalized(np.array([1.0, 1.0]))


def _random_u2(rng):
    a, b, c = rng.uniform(-math.pi, math.pi, 3)
    return ql.exp_su2("x", a) @ ql.exp_su2("y", b) @ ql.exp_su2("x", c)


@pytest.mark.properties
class TestLinalgProperties:
    @given(axis=st.sampled_from("xy"), phi=angles)
    def test_su2_unitary_and_inverse(self, axis, phi):
        u = ql.exp_su2(axis, phi)
        assert ql.is_unitary(u, 1e-12)
        assert ql.max_norm(ql.exp_su2(axis, -phi) - ql.dagger(u)) <= 1e-12

    @settings(max_examples=50)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_kron_mixed_product(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c, d = (_random_u2(rng) for _ in range(4))
        lhs = ql.kron(a, b) @ ql.kron(c, d)
        assert ql.max_norm(lhs - ql.kron(a @ c, b @ d)) <= 1e-12

    @settings(max_examples=50)
    @given(seed=st.integers(0, 2**32 - 1), phi=angles, psi=angles)
    def test_global_phase_reflexive_symmetric_invariant(self, seed, phi, psi):
        rng = np.random.default_rng(seed)
        a = ql.kron(_random_u2(rng), _random_u2(rng))
        b = ql.kron(_random_u2(rng), _random_u2(rng))
        assert ql.equal_up_to_global_phase(a, a, 1e-12)
        ea, eb = cmath.exp(1j * phi), cmath.exp(1j * psi)
        assert ql.equal_up_to_global_phase(a * ea, a * eb, 1e-10)
        assert bool(ql.equal_up_to_global_phase(a, b, 1e-10)) == \
            bool(ql.equal_up_to_global_phase(b, a, 1e-10))
        assert bool(ql.equal_up_to_global_phase(a, b, 1e-10)) == \
            bool(ql.equal_up_to_global_phase(a * ea, b * eb, 1e-10))

    @given(s=angles, t=angles)
    def test_exp_diag_additive(self, s, t):
        d = np.diag([1, -1, -1, 1]) / 4
        lhs = ql.exp_diag_generator(d, s + t)
        rhs = ql.exp_diag_generator(d, s) @ ql.exp_diag_generator(d, t)
        assert ql.max_norm(lhs - rhs) <= 1e-12
