import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bivkrylov.dense import (
    ScalarFunction,
    eig,
    exp_function,
    frobenius_norm,
    matrix_function,
    phi_function,
    power_function,
    shifted_inverse_function,
    sqrt_neg_function,
)
from bivkrylov.errors import FunctionUndefined, NonDiagonalizable

from conftest import random_diagonalizable


def test_eig_of_diagonal():
    dec = eig(np.diag([2.0, 1.0]))
    np.testing.assert_allclose(dec.eigvals, [1, 2])
    np.testing.assert_allclose(np.abs(dec.eigvecs), [[0, 1], [1, 0]])


def test_eig_rejects_jordan_block():
    with pytest.raises(NonDiagonalizable):
        eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eig_residual_on_random_unit_disk_matrix(rng):
    z = rng.uniform(0, 1, (8, 8)) * np.exp(2j * np.pi * rng.uniform(0, 1, (8, 8)))
    dec = eig(z)
    residual = frobenius_norm(z @ dec.eigvecs - dec.eigvecs * dec.eigvals)
    assert residual <= 1e-10 * frobenius_norm(z)
    assert np.isfinite(dec.cond_estimate)


def test_eigenvalues_sorted_lexicographically(rng):
    M = rng.standard_normal((7, 7))
    vals = eig(M).eigvals
    keys = [(v.real, v.imag) for v in vals]
    assert keys == sorted(keys)


def test_eig_non_square():
    with pytest.raises(ValueError):
        eig(np.ones((2, 3)))


def test_rejects_nan():
    with pytest.raises(ValueError):
        eig(np.array([[np.nan, 0], [0, 1]]))


def test_square_of_jordan_block_needs_the_polynomial_path():
    with pytest.raises(NonDiagonalizable):
        matrix_function(power_function(2), np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_exp_of_zero_is_identity():
    np.testing.assert_allclose(matrix_function(exp_function(), np.zeros((2, 2))), np.eye(2))


def test_exp_of_diagonal():
    np.testing.assert_allclose(matrix_function(exp_function(), np.diag([0.0, 1.0])), np.diag([1, math.e]))


def test_undefined_at_eigenvalue():
    with pytest.raises(FunctionUndefined):
        matrix_function(shifted_inverse_function(0.0), np.diag([0.0, 1.0]))


@pytest.mark.parametrize(
    "M, expected",
    [(np.zeros((3, 3)), 0.0), (np.eye(3), math.sqrt(3)), (np.array([[3.0, 4.0]]), 5.0)],
)
def test_frobenius_norm(M, expected):
    assert frobenius_norm(M) == pytest.approx(expected, abs=1e-15)


def test_auto_method_uses_dense_evaluator():
    J = np.array([[1.0, 1.0], [0.0, 1.0]])
    F = matrix_function(exp_function(), J, method="auto")
    np.testing.assert_allclose(F, math.e * np.array([[1, 1], [0, 1]]))


def test_nearly_defective_input_below_the_cap():
    # eigenvector condition number about 2e11: accepted, with accuracy ~ cond * eps
    M = np.array([[1.0, 1.0], [0.0, 1.0 + 1e-11]])
    assert eig(M).cond_estimate > 1e11
    F = matrix_function(exp_function(), M)
    np.testing.assert_allclose(F, math.e * np.array([[1, 1], [0, 1]]), rtol=1e-4)


def test_gap_below_the_perturbation_scale_stays_defective():
    with pytest.raises(NonDiagonalizable):
        eig(np.array([[1.0, 1.0], [0.0, 1.0 + 1e-13]]))


@pytest.mark.parametrize(
    "f, points",
    [
        (exp_function(), [0.3, -2.0 + 1j]),
        (sqrt_neg_function(), [-0.5, -3.0 + 0.5j]),
        (phi_function(), [1e-4, -3.0, 2.0 + 1j, 1e-8]),
        (power_function(3), [1.5, -0.7j]),
        (shifted_inverse_function(20.0), [0.0, -3.0]),
    ],
)
def test_derivative_matches_central_difference(f, points):
    z = np.asarray(points, dtype=complex)
    h = 1e-6 * np.maximum(1, np.abs(z))
    fd = (f(z + h) - f(z - h)) / (2 * h)
    np.testing.assert_allclose(f.deriv(z), fd, rtol=1e-6)


def test_phi_series_branch_is_continuous():
    phi = phi_function()
    z = np.array([0.999e-6, 1.001e-6])
    np.testing.assert_allclose(phi(z), np.expm1(z) / z, rtol=1e-14)
    assert phi(np.array([0.0]))[0] == 1


def test_derivative_object():
    d = exp_function().derivative()
    assert d(np.array([0.0]))[0] == 1
    with pytest.raises(FunctionUndefined):
        ScalarFunction(np.sin).derivative()


def _monomial_sum(coeffs, M):
    out = np.zeros_like(M, dtype=complex)
    P = np.eye(M.shape[0])
    for a in coeffs:
        out = out + a * P
        P = P @ M
    return out


@given(
    n=st.integers(1, 8),
    coeffs=st.lists(st.floats(-2, 2), min_size=1, max_size=6),
    seed=st.integers(0, 10_000),
)
def test_polynomial_consistency(n, coeffs, seed):
    rng = np.random.default_rng(seed)
    M, _ = random_diagonalizable(rng, n)
    p = ScalarFunction(lambda z: np.polyval(coeffs[::-1], z))
    expected = _monomial_sum(coeffs, M)
    got = matrix_function(p, M)
    assert frobenius_norm(got - expected) <= 1e-9 * max(1.0, frobenius_norm(expected))


@given(n=st.integers(1, 8), seed=st.integers(0, 10_000))
def test_similarity_invariance(n, seed):
    rng = np.random.default_rng(seed)
    M, _ = random_diagonalizable(rng, n)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    S = Q @ np.diag(rng.uniform(1, 2, n))
    Si = np.linalg.inv(S)
    f = exp_function()
    lhs = matrix_function(f, S @ M @ Si)
    rhs = S @ matrix_function(f, M) @ Si
    assert frobenius_norm(lhs - rhs) <= 1e-8 * frobenius_norm(rhs)


@given(n=st.integers(1, 10), seed=st.integers(0, 10_000))
def test_hermitian_input_yields_unitary_eigenvectors(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    dec = eig(X + X.conj().T)
    assert dec.unitary
    assert frobenius_norm(dec.eigvecs.conj().T @ dec.eigvecs - np.eye(n)) <= 1e-12
