"""Tensorized Krylov subspace methods for bivariate matrix functions.

The central routine is :func:`approximate`, which computes a low-rank
approximation ``U X V^T`` of ``f{A,B}(C)`` for large ``A``, ``B`` (accessed
through matrix-vector products) and low-rank ``C``. Frechet derivatives of
univariate matrix functions are handled by :func:`frechet_apply`, and
:mod:`bivkrylov.bounds` provides a-priori error bounds.
"""

from .bounds import (
    BoundParams,
    SpectralInterval,
    bernstein_rate,
    chebyshev_min_error,
    exp_bound_reference,
    frechet_bound,
    m_constant,
    numerical_range_interval,
    numerical_range_rectangle,
    phi_bound,
    phi_optimal_radius,
    theorem_bound,
)
from .dense import (
    ScalarFunction,
    SpectralDecomposition,
    eig,
    exp_function,
    frobenius_norm,
    matrix_function,
    phi_function,
    power_function,
    shifted_inverse_function,
    sqrt_neg_function,
)
from .driver import (
    ApproximationResult,
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
from .errors import *  # noqa: F401,F403
from .experiments import ExperimentConfig, run_experiment, write_csv
from .frechet import arnoldi_function_vector, finite_difference_frechet, frechet_apply, frechet_fixed, frechet_path
from .kernels import (
    BivariateFunction,
    DividedDifference,
    FrequencyLimited,
    LowRankRhs,
    Polynomial,
    ReciprocalPolynomial,
    Stein,
    SumShift,
    Sylvester,
    TimeLimited,
    eval_compressed,
    hadamard_eval,
    poly_eval_bivariate,
    relative_error,
    sylvester_small,
)
from .krylov import ArnoldiState, LinearOperator, arnoldi, arnoldi_extend, arnoldi_init, aslinearoperator
from .mmio import read_matrix_market, read_vector, write_matrix_market

__version__ = "0.1.0"
