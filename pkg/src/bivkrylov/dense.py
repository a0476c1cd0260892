"""Dense linear algebra kernels: eigendecomposition and univariate matrix functions.

Everything here works on small in-memory ``numpy`` arrays. The compressed
matrices produced by the Krylov processes and the dense verification oracle
are both evaluated through :func:`eig` and :func:`matrix_function`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import mpmath
import numpy as np
import scipy.linalg

from .errors import FunctionUndefined, NonDiagonalizable

__all__ = [
    "COND_CAP",
    "TOL_SPECTRAL",
    "ScalarFunction",
    "SpectralDecomposition",
    "as_matrix",
    "eig",
    "frobenius_norm",
    "matrix_function",
    "exp_function",
    "phi_function",
    "power_function",
    "shifted_inverse_function",
    "sqrt_neg_function",
]

COND_CAP = 1e12
TOL_SPECTRAL = 1e-10
HERMITIAN_TOL = 1e-13
PERTURBATION_SIZE = 1e-13
_PERTURBATION_SEED = 20180213


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-D ``ndarray`` (no copy when possible)."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.issubdtype(M.dtype, np.number):
        raise TypeError(f"{name} must be numeric, got dtype {M.dtype}")
    if M.dtype.kind in "iub":
        M = M.astype(float)
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return M


def frobenius_norm(M):
    """Frobenius norm of a matrix (2-norm for vectors)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M.ravel()))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs ``M @ eigvecs = eigvecs @ diag(eigvals)``.

    ``unitary`` is set when ``eigvecs`` came from a Hermitian solver, in which
    case its inverse is its conjugate transpose.
    """

    eigvecs: np.ndarray
    eigvals: np.ndarray
    cond_estimate: float
    unitary: bool = False

    def inverse_apply(self, X):
        """Compute ``eigvecs^{-1} @ X``."""
        if self.unitary:
            return self.eigvecs.conj().T @ X
        return np.linalg.solve(self.eigvecs, X)

    def inverse_transpose_apply_right(self, X):
        """Compute ``X @ eigvecs^{-T}``."""
        if self.unitary:
            return X @ self.eigvecs.conj()
        return np.linalg.solve(self.eigvecs, X.T).T


def _is_hermitian(M, scale):
    return frobenius_norm(M - M.conj().T) <= HERMITIAN_TOL * scale


def _sorted(vals, vecs):
    order = np.lexsort((np.imag(vals), np.real(vals)))
    return vals[order], vecs[:, order]


def _raw_eig(M):
    vals, vecs = np.linalg.eig(M)
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(vecs)
    if not np.isfinite(cond):
        cond = np.inf
    return vals, vecs, float(cond)


def eig(M, cond_cap=COND_CAP, tol=TOL_SPECTRAL):
    """Eigendecomposition with a conditioning guard.

    Hermitian input (up to ``1e-13`` relative) goes through ``eigh`` and yields
    a unitary eigenvector matrix. Otherwise the general solver is used; if the
    eigenvector condition number exceeds ``cond_cap``, the diagonal is
    perturbed once by a seeded random shift of size ``1e-13 * ||M||_F`` and the
    decomposition retried.

    Eigenvalues are sorted lexicographically by (real, imag).

    Raises
    ------
    NonDiagonalizable
        If the eigenvector matrix stays too ill-conditioned after the retry.
    """
    M = as_matrix(M)
    n, n2 = M.shape
    if n != n2:
        raise ValueError(f"eig needs a square matrix, got {M.shape}")
    if n == 0:
        return SpectralDecomposition(np.zeros((0, 0), M.dtype), np.zeros(0), 1.0, True)
    scale = frobenius_norm(M)

    if _is_hermitian(M, scale):
        vals, vecs = np.linalg.eigh((M + M.conj().T) / 2)
        vals, vecs = _sorted(vals, vecs)
        return SpectralDecomposition(vecs, vals, 1.0, unitary=True)

    vals, vecs, cond = _raw_eig(M)
    if cond > cond_cap:
        rng = np.random.default_rng(_PERTURBATION_SEED)
        shift = PERTURBATION_SIZE * max(scale, np.finfo(float).tiny) * rng.uniform(-1, 1, n)
        vals, vecs, cond = _raw_eig(M + np.diag(shift))
        if cond > cond_cap:
            raise NonDiagonalizable(
                f"eigenvector condition number {cond:.3g} exceeds cap {cond_cap:.3g}"
            )
    vals, vecs = _sorted(vals, vecs)
    residual = frobenius_norm(M @ vecs - vecs * vals)
    if residual > tol * scale:
        raise NonDiagonalizable(
            f"eigen-residual {residual:.3g} exceeds {tol:.1g} * ||M||_F = {tol * scale:.3g}"
        )
    return SpectralDecomposition(vecs, vals, cond)


@dataclass(frozen=True)
class ScalarFunction:
    """A univariate function with optional derivative and dense evaluator.

    Parameters
    ----------
    func
        Vectorized map ``z -> f(z)`` on complex arrays.
    deriv
        Vectorized derivative ``z -> f'(z)``; required for divided differences
        evaluated pointwise on the diagonal.
    matrix
        Optional dense evaluator ``M -> f(M)`` that does not rely on a full
        eigenvector basis (e.g. ``scipy.linalg.expm``). Used when the argument
        may be defective, such as block-triangular embeddings with coinciding
        diagonal spectra.
    name
        Label for reports.
    mp
        Optional scalar evaluator on ``mpmath`` numbers, for high-precision
        approximation-error measurements.
    """

    func: Callable
    deriv: Optional[Callable] = None
    matrix: Optional[Callable] = None
    name: str = "f"
    mp: Optional[Callable] = None

    def __call__(self, z):
        return self.func(z)

    def derivative(self):
        """The derivative as a :class:`ScalarFunction` (no dense evaluator)."""
        if self.deriv is None:
            raise FunctionUndefined(f"{self.name} has no derivative")
        return ScalarFunction(self.deriv, name=f"{self.name}'")


def _checked_values(f, z):
    z = np.asarray(z)
    try:
        with np.errstate(all="ignore"):
            vals = np.asarray(f(z), dtype=complex)
    except (ZeroDivisionError, FloatingPointError, ValueError) as exc:
        raise FunctionUndefined(str(exc)) from exc
    if vals.shape != z.shape:
        vals = np.broadcast_to(vals, z.shape).copy()
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise FunctionUndefined(f"function is not finite at {z[bad][:3]}")
    return vals


def matrix_function(f, M, method="eig"):
    """Evaluate ``f(M)`` for a square matrix.

    With ``method="eig"`` the result is ``P diag(f(lambda_i)) P^{-1}`` from
    :func:`eig`. With ``method="auto"`` a dense evaluator attached to ``f``
    (``f.matrix``) takes precedence.
    """
    M = as_matrix(M)
    if method == "auto" and getattr(f, "matrix", None) is not None:
        out = np.asarray(f.matrix(M))
        if not np.all(np.isfinite(out)):
            raise FunctionUndefined(f"dense evaluator of {f.name} returned non-finite values")
        return out
    if method not in ("eig", "auto"):
        raise ValueError(f"unknown method {method!r}")
    dec = eig(M)
    fvals = _checked_values(f, dec.eigvals)
    P = dec.eigvecs
    if dec.unitary:
        return (P * fvals) @ P.conj().T
    return np.linalg.solve(P.T, (P * fvals).T).T


def exp_function():
    """``exp`` with ``scipy.linalg.expm`` as dense evaluator."""
    return ScalarFunction(np.exp, np.exp, scipy.linalg.expm, "exp", mpmath.exp)


def _neg_sqrt_matrix(M):
    return scipy.linalg.sqrtm(-M)


def sqrt_neg_function():
    """``z -> sqrt(-z)`` (principal branch)."""
    return ScalarFunction(
        lambda z: np.sqrt(-np.asarray(z, dtype=complex)),
        lambda z: -0.5 / np.sqrt(-np.asarray(z, dtype=complex)),
        _neg_sqrt_matrix,
        "sqrt(-z)",
    )


def power_function(p):
    """``z -> z**p`` for a nonnegative integer ``p``."""
    p = int(p)
    if p < 0:
        raise ValueError("power must be nonnegative")

    def deriv(z):
        z = np.asarray(z, dtype=complex)
        return p * z ** (p - 1) if p > 0 else np.zeros_like(z)

    return ScalarFunction(
        lambda z: np.asarray(z, dtype=complex) ** p,
        deriv,
        lambda M: np.linalg.matrix_power(M, p),
        f"z^{p}",
    )


def shifted_inverse_function(shift):
    """``z -> 1/(z + shift)``."""

    def inv(M):
        return np.linalg.inv(M + shift * np.eye(M.shape[0]))

    return ScalarFunction(
        lambda z: 1.0 / (np.asarray(z, dtype=complex) + shift),
        lambda z: -1.0 / (np.asarray(z, dtype=complex) + shift) ** 2,
        inv,
        f"1/(z+{shift:g})",
    )


def _phi(z):
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-6
    zs = z[small]
    out[small] = 1 + zs / 2 + zs**2 / 6
    zl = z[~small]
    out[~small] = np.expm1(zl) / zl
    return out


def _phi_deriv(z):
    # phi'(z) = (z e^z - e^z + 1) / z^2
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-3
    zs = z[small]
    out[small] = 0.5 + zs / 3 + zs**2 / 8 + zs**3 / 30
    zl = z[~small]
    out[~small] = (zl * np.exp(zl) - np.expm1(zl)) / zl**2
    return out


def _phi_mp(z):
    return mpmath.expm1(z) / z if z != 0 else mpmath.mpf(1)


def phi_function():
    """``phi(z) = (exp(z) - 1) / z`` with its removable singularity filled in."""
    return ScalarFunction(_phi, _phi_deriv, None, "phi", _phi_mp)
