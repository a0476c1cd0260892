import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bivkrylov.dense import exp_function, frobenius_norm
from bivkrylov.driver import (
    DriverOptions,
    Termination,
    approximate,
    approximate_fixed,
    approximation_path,
    error_estimate,
    side_selection,
    stein_residual,
    sylvester_residual,
)
from bivkrylov.errors import ShapeMismatch
from bivkrylov.kernels import (
    LowRankRhs,
    Polynomial,
    Stein,
    SumShift,
    Sylvester,
    TimeLimited,
    eval_compressed,
    hadamard_eval,
    poly_eval_bivariate,
    relative_error,
)

from conftest import assembled_difference, random_diagonalizable


def test_error_estimate_examples(rng):
    X = rng.standard_normal((3, 2))
    big = np.zeros((5, 4))
    big[:3, :2] = X
    assert error_estimate(X, big) == 0
    assert error_estimate(np.zeros((0, 0)), X) == pytest.approx(frobenius_norm(X))
    with pytest.raises(ShapeMismatch):
        error_estimate(big, X)


def test_error_estimate_equals_assembled_difference(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((30, 6)))
    W, _ = np.linalg.qr(rng.standard_normal((25, 6)))
    small, big = rng.standard_normal((4, 4)), rng.standard_normal((6, 6))
    direct = frobenius_norm(Q @ big @ W.T - Q[:, :4] @ small @ W[:, :4].T)
    assert error_estimate(small, big) == pytest.approx(direct, rel=1e-12)


def _padded(X, rows, cols):
    out = np.zeros((rows, cols))
    out[: X.shape[0], : X.shape[1]] = X
    return out


def test_side_selection_examples():
    core = np.zeros((1, 1))
    grow_k = _padded(np.array([[0.0], [1.0]]), 2, 1)
    grow_l = np.array([[0.0, 0.5]])
    assert side_selection(grow_k, grow_l, core) == "A"
    assert side_selection(np.zeros((2, 1)), np.zeros((1, 2)), core) == "both"
    assert side_selection(np.array([[0.0], [0.3]]), np.array([[0.0, 0.7]]), core) == "B"


def test_options_validation():
    for kwargs in ({"h": 0}, {"step": 0}, {"tol": -1.0}, {"split": "block"}):
        with pytest.raises(ValueError):
            DriverOptions(**kwargs)
    assert DriverOptions(h=3).growth == 3
    assert DriverOptions(h=3, step=1).growth == 1


def test_polynomial_exactness_at_fixed_sizes(rng):
    A = rng.standard_normal((20, 20)) / 4
    B = rng.standard_normal((15, 15)) / 4
    c, d = rng.standard_normal(20), rng.standard_normal(15)
    p = rng.standard_normal((3, 3))
    res = approximate_fixed(Polynomial(p), A, B, c, d, 3, 3)
    assert relative_error(res.dense(), poly_eval_bivariate(p, A, B, np.outer(c, d))) <= 1e-10


def test_full_depth_equals_oracle(rng):
    A, _ = random_diagonalizable(rng, 12, -1, 0)
    B, _ = random_diagonalizable(rng, 9, -1, 0)
    c, d = rng.standard_normal(12), rng.standard_normal(9)
    res = approximate(SumShift(exp_function()), A, B, (c, d), DriverOptions(tol=0.0))
    assert res.k == 12 and res.l == 9
    assert relative_error(res.dense(), hadamard_eval(SumShift(exp_function()), A, B, np.outer(c, d))) <= 1e-8


def test_sylvester_converges(rng):
    lam = np.linspace(0.1, 100, 300)
    c, d = rng.standard_normal(300), rng.standard_normal(300)
    res = approximate(Sylvester(), lam, lam, (c, d), DriverOptions(tol=1e-8))
    assert res.termination is Termination.CONVERGED
    assert sylvester_residual(lam, lam, res, c, d) / (np.linalg.norm(c) * np.linalg.norm(d)) <= 1e-6
    U, V = res.U, res.V
    assert frobenius_norm(U.T @ U - np.eye(res.k)) <= 1e-12
    assert frobenius_norm(V.T @ V - np.eye(res.l)) <= 1e-12


def test_stein_residual(rng):
    A = np.diag(rng.uniform(-0.9, 0.9, 80))
    c = rng.standard_normal(80)
    res = approximate(Stein(), A, A, (c, c), DriverOptions(tol=1e-10))
    assert stein_residual(A, A, res, c, c) <= 1e-8 * np.linalg.norm(c) ** 2


def test_budget_exhaustion_is_reported(rng):
    lam = np.linspace(0.1, 100, 200)
    c = rng.standard_normal(200)
    res = approximate(Sylvester(), lam, lam, (c, c), DriverOptions(tol=1e-12, k_max=4, l_max=4))
    assert res.termination is Termination.BUDGET_EXHAUSTED
    assert res.k == 4 and res.l == 4


def test_breakdown_freezes_a_side(rng):
    A = np.repeat([-1.0, -2.0, -3.0], 5)
    B = np.linspace(-3, -0.5, 40)
    c, d = rng.standard_normal(15), rng.standard_normal(40)
    res = approximate(TimeLimited(0, 1), A, B, (c, d), DriverOptions(tol=1e-12))
    assert res.k == 3
    assert res.termination is Termination.CONVERGED
    exact = hadamard_eval(TimeLimited(0, 1), np.diag(A), np.diag(B), np.outer(c, d))
    assert relative_error(res.dense(), exact) <= 1e-9


def test_whole_space_invariant_reports_breakdown(rng):
    A = np.repeat([-1.0, -2.0], 4)
    c = rng.standard_normal(8)
    res = approximate(Sylvester(), A, A, (c, c), DriverOptions(tol=0.0))
    assert res.termination is Termination.BREAKDOWN
    assert relative_error(res.dense(), hadamard_eval(Sylvester(), np.diag(A), np.diag(A), np.outer(c, c))) <= 1e-12


def test_balanced_growth(rng):
    A = np.linspace(-1, -0.5, 60)
    B = np.linspace(-100, -0.1, 60)
    c, d = rng.standard_normal(60), rng.standard_normal(60)
    res = approximate(Sylvester(), A, B, (c, d), DriverOptions(tol=1e-10, balance=True))
    exact = hadamard_eval(Sylvester(), np.diag(A), np.diag(B), np.outer(c, d))
    assert relative_error(res.dense(), exact) <= 1e-7
    assert res.k < res.l


def test_trace_records_estimates(rng):
    lam = np.linspace(0.1, 10, 50)
    c = rng.standard_normal(50)
    res = approximate(Sylvester(), lam, lam, (c, c), DriverOptions(tol=1e-9))
    ks = [k for k, _, _ in res.estimate_trace]
    assert ks == list(range(1, 1 + 2 * len(ks), 2))
    assert all(e >= 0 for _, _, e in res.estimate_trace)
    assert "converged" in repr(res)


def test_core_reproducible_from_states(rng):
    A, _ = random_diagonalizable(rng, 30, -2, -0.1)
    c, d = rng.standard_normal(30), rng.standard_normal(30)
    res = approximate(TimeLimited(0, 2), A, A.T, (c, d), DriverOptions(tol=1e-9))
    sa, sb = res.states
    k, l = res.k, res.l
    X = eval_compressed(TimeLimited(0, 2), sa.hess[:k, :k], sb.hess[:l, :l],
                        sa.truncated(k).projected_start(), sb.truncated(l).projected_start())
    assert np.array_equal(X, res.X)


def test_path_matches_fixed(rng):
    lam = np.linspace(-5, -0.1, 40)
    c = rng.standard_normal(40)
    path = approximation_path(TimeLimited(0, 1), lam, lam, c, c, [2, 5, 9])
    for k, res in zip([2, 5, 9], path):
        fixed = approximate_fixed(TimeLimited(0, 1), lam, lam, c, c, k)
        np.testing.assert_allclose(res.dense(), fixed.dense(), atol=1e-14)


def test_shape_mismatch(rng):
    with pytest.raises(ShapeMismatch):
        approximate(Sylvester(), np.ones(4), np.ones(3), (np.ones(4), np.ones(4)))


@pytest.mark.parametrize("split", ["svd", "terms"])
def test_rank_additivity(split, rng):
    lam = np.linspace(0.1, 20, 60)
    mu = np.linspace(0.5, 10, 50)
    L, R = rng.standard_normal((60, 2)), rng.standard_normal((50, 2))
    opts = DriverOptions(tol=1e-12, split=split)
    res = approximate(Sylvester(), lam, mu, LowRankRhs(L, R), opts)
    pairs = LowRankRhs(L, R).svd_terms() if split == "svd" else LowRankRhs(L, R).terms()
    summed = sum(approximate(Sylvester(), lam, mu, (c, d), opts).dense() for c, d in pairs)
    assert relative_error(res.dense(), summed) <= 1e-12
    assert frobenius_norm(res.U.T @ res.U - np.eye(res.k)) <= 1e-12
    exact = hadamard_eval(Sylvester(), np.diag(lam), np.diag(mu), L @ R.T)
    assert relative_error(res.dense(), exact) <= 1e-9


@given(seed=st.integers(0, 10_000), k=st.integers(1, 6), h=st.integers(1, 3))
def test_estimate_identity_on_random_runs(seed, k, h):
    rng = np.random.default_rng(seed)
    A, _ = random_diagonalizable(rng, 20, -1, 0)
    B, _ = random_diagonalizable(rng, 18, -1, 0)
    c, d = rng.standard_normal(20), rng.standard_normal(18)
    small, big = approximation_path(TimeLimited(0, 1), A, B, c, d, [k, k + h])
    direct = assembled_difference(small, big)
    assert error_estimate(small.X, big.X) == pytest.approx(direct, rel=1e-12)


def test_sylvester_shift(rng):
    lam = np.linspace(-2, 3, 30)
    c = rng.standard_normal(30)
    res = approximate(Sylvester(7.0), lam, lam, (c, c), DriverOptions(tol=1e-12))
    assert sylvester_residual(lam, lam, res, c, c, 7.0) <= 1e-9 * np.linalg.norm(c) ** 2
    assert math.isfinite(res.estimate_trace[-1][2])
