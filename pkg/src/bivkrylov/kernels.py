"""Bivariate functions and their evaluation on small dense matrices.

A bivariate matrix function ``f{A,B}`` maps ``C`` to the matrix obtained by
substituting ``A`` from the left and ``B^T`` from the right into ``f(x, y)``.
For diagonalizable ``A = P diag(lambda) P^{-1}`` and ``B = Q diag(mu) Q^{-1}``

    f{A,B}(C) = P (F o (P^{-1} C Q^{-T})) Q^T,     F_ij = f(lambda_i, mu_j),

which :func:`hadamard_eval` implements and which serves as the reference for
every specialized path in this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .dense import ScalarFunction, as_matrix, eig, frobenius_norm, matrix_function
from .errors import FunctionUndefined, PoleHit, ShapeMismatch, SingularPencil

__all__ = [
    "POLE_TOL",
    "SIGMA_SWITCH",
    "BivariateFunction",
    "DividedDifference",
    "FrequencyLimited",
    "LowRankRhs",
    "Polynomial",
    "ReciprocalPolynomial",
    "Stein",
    "SumShift",
    "Sylvester",
    "TimeLimited",
    "divided_difference_block",
    "eval_compressed",
    "eval_scalar",
    "hadamard_eval",
    "poly_eval_bivariate",
    "sylvester_small",
]

SIGMA_SWITCH = 1e-6
POLE_TOL = 1e-12


def _pole_check(den, scale, name):
    bad = np.abs(den) < POLE_TOL * scale
    bad |= den == 0
    if np.any(bad):
        raise PoleHit(f"{name}: denominator vanishes at {np.count_nonzero(bad)} point(s)")


def _coeff_grid(coeffs):
    p = np.atleast_2d(np.asarray(coeffs))
    if p.ndim != 2 or p.size == 0:
        raise ValueError("coefficient grid must be a non-empty 2-D array")
    if not np.all(np.isfinite(p)):
        raise ValueError("coefficient grid contains NaN or Inf")
    return p


def _poly_values(p, x, y):
    # Horner in x for every y-power, then Horner in y
    out = 0
    for j in range(p.shape[1] - 1, -1, -1):
        col = 0
        for i in range(p.shape[0] - 1, -1, -1):
            col = col * x + p[i, j]
        out = out * y + col
    return out


class BivariateFunction:
    """Base class: ``values`` evaluates on broadcast complex arrays."""

    def values(self, x, y):
        raise NotImplementedError

    def __call__(self, x, y):
        return self.values(x, y)


@dataclass(frozen=True)
class Sylvester(BivariateFunction):
    """``f(x, y) = 1 / (shift + x + y)``; ``f{A,B}(C)`` solves ``AX + XB^T + shift X = C``."""

    shift: complex = 0.0

    def values(self, x, y):
        x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
        den = self.shift + x + y
        _pole_check(den, abs(self.shift) + np.abs(x) + np.abs(y), "Sylvester")
        return 1.0 / den


@dataclass(frozen=True)
class Stein(BivariateFunction):
    """``f(x, y) = 1 / (1 - xy)``; ``f{A,B}(C)`` solves ``X - A X B^T = C``."""

    def values(self, x, y):
        x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
        den = 1.0 - x * y
        _pole_check(den, 1.0 + np.abs(x * y), "Stein")
        return 1.0 / den


@dataclass(frozen=True)
class Polynomial(BivariateFunction):
    """``p(x, y) = sum_ij coeffs[i, j] x^i y^j``."""

    coeffs: np.ndarray = field(default_factory=lambda: np.ones((1, 1)))

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _coeff_grid(self.coeffs))

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1

    def values(self, x, y):
        x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
        return _poly_values(self.coeffs, x, y) + 0 * (x + y)


@dataclass(frozen=True)
class ReciprocalPolynomial(BivariateFunction):
    """``f(x, y) = 1 / p(x, y)`` for a coefficient grid ``p``."""

    coeffs: np.ndarray = field(default_factory=lambda: np.ones((1, 1)))

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _coeff_grid(self.coeffs))

    def values(self, x, y):
        x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
        den = _poly_values(self.coeffs, x, y) + 0 * (x + y)
        scale = _poly_values(np.abs(self.coeffs), np.abs(x), np.abs(y))
        _pole_check(den, scale, "ReciprocalPolynomial")
        return 1.0 / den


@dataclass(frozen=True)
class TimeLimited(BivariateFunction):
    """Kernel of the time-limited Gramian on ``[t_s, t_e]``.

    ``f(x, y) = (exp(t_e s) - exp(t_s s)) / s`` with ``s = x + y``; for
    ``t_e = inf`` the first term is dropped (``Re s < 0`` assumed). At
    ``|s| < SIGMA_SWITCH`` the Taylor expansion around ``s = 0`` is used.
    """

    t_s: float = 0.0
    t_e: float = math.inf

    def __post_init__(self):
        if not (0 <= self.t_s < self.t_e):
            raise ValueError(f"need 0 <= t_s < t_e, got t_s={self.t_s}, t_e={self.t_e}")
        if math.isinf(self.t_s):
            raise ValueError("t_s must be finite")

    def values(self, x, y):
        s = np.asarray(x, dtype=complex) + np.asarray(y, dtype=complex)
        ts, te = self.t_s, self.t_e
        if math.isinf(te):
            _pole_check(s, np.ones(s.shape), "TimeLimited(t_e=inf)")
            return -np.exp(ts * s) / s
        out = np.empty(s.shape, dtype=complex)
        small = np.abs(s) < SIGMA_SWITCH
        ss = s[small]
        out[small] = (te - ts) + (te**2 - ts**2) * ss / 2 + (te**3 - ts**3) * ss**2 / 6
        sl = s[~small]
        with np.errstate(over="ignore"):
            out[~small] = np.exp(ts * sl) * np.expm1((te - ts) * sl) / sl
        return out


def _freq_g(z, w1, w2):
    z = np.asarray(z, dtype=complex)
    if math.isinf(w2):
        # limit of Re((i/pi) log((z + i w2)/(z + i w1))) as w2 -> inf
        return np.angle(z + 1j * w1) / np.pi - 0.5
    return np.real(1j / np.pi * np.log((z + 1j * w2) / (z + 1j * w1)))


@dataclass(frozen=True)
class FrequencyLimited(BivariateFunction):
    """Kernel of the frequency-limited Gramian on ``[w1, w2]``.

    ``f(x, y) = -(g(x) + g(y)) / (x + y)`` with
    ``g(z) = Re((i/pi) log((z + i w2) / (z + i w1)))`` on the principal branch.
    """

    w1: float = 0.0
    w2: float = math.inf

    def __post_init__(self):
        if not (0 <= self.w1 < self.w2):
            raise ValueError(f"need 0 <= w1 < w2, got w1={self.w1}, w2={self.w2}")

    def g(self, z):
        return _freq_g(z, self.w1, self.w2)

    def values(self, x, y):
        x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
        s = x + y
        _pole_check(s, np.abs(x) + np.abs(y), "FrequencyLimited")
        return -(self.g(x) + self.g(y)) / s


@dataclass(frozen=True)
class DividedDifference(BivariateFunction):
    """First divided difference ``f[x, y]`` of a univariate function.

    ``f^{[1]}{A, A^T}(E)`` is the Frechet derivative of ``f`` at ``A`` in
    direction ``E``. Pointwise, ``f'((x + y) / 2)`` is used when
    ``|x - y| < SIGMA_SWITCH``.
    """

    f: ScalarFunction

    def values(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex))
        out = np.empty(x.shape, dtype=complex)
        close = np.abs(x - y) < SIGMA_SWITCH
        if np.any(close):
            if self.f.deriv is None:
                raise FunctionUndefined(f"{self.f.name} needs a derivative on the diagonal")
            out[close] = self.f.deriv((x[close] + y[close]) / 2)
        far = ~close
        xf, yf = x[far], y[far]
        out[far] = (self.f(xf) - self.f(yf)) / (xf - yf)
        return out


@dataclass(frozen=True)
class SumShift(BivariateFunction):
    """``f(x, y) = g(x + y)`` for a univariate ``g``."""

    g: ScalarFunction

    def values(self, x, y):
        return np.asarray(self.g(np.asarray(x, dtype=complex) + np.asarray(y, dtype=complex)))


@dataclass(frozen=True)
class LowRankRhs:
    """Factored right-hand side ``C = left @ right.T = sum_i c_i d_i^T``."""

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        if left.ndim == 1:
            left = left[:, None]
        if right.ndim == 1:
            right = right[:, None]
        if left.shape[1] != right.shape[1]:
            raise ShapeMismatch(
                f"{left.shape[1]} left factors but {right.shape[1]} right factors"
            )
        if left.shape[1] == 0:
            raise ValueError("need at least one rank-1 term")
        for name, F in (("left", left), ("right", right)):
            if not np.all(np.isfinite(F)):
                raise ValueError(f"{name} factors contain NaN or Inf")
            if np.any(np.linalg.norm(F, axis=0) == 0):
                raise ValueError(f"{name} factors must be nonzero")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @classmethod
    def rank_one(cls, c, d):
        return cls(np.asarray(c)[:, None], np.asarray(d)[:, None])

    @property
    def rank(self):
        return self.left.shape[1]

    @property
    def shape(self):
        return self.left.shape[0], self.right.shape[0]

    def dense(self):
        return self.left @ self.right.T

    def terms(self):
        """The stored rank-1 terms as ``(c_i, d_i)`` pairs."""
        return [(self.left[:, i], self.right[:, i]) for i in range(self.rank)]

    def svd_terms(self, rtol=1e-14):
        """Rank-1 terms from a thin SVD of ``C`` (orthogonal left/right factors).

        Terms with singular value below ``rtol * sigma_max`` are dropped.
        """
        Qc, Rc = np.linalg.qr(self.left)
        Qd, Rd = np.linalg.qr(self.right)
        W, s, Zh = np.linalg.svd(Rc @ Rd.T, full_matrices=False)
        keep = s > rtol * s[0] if s[0] > 0 else np.zeros(s.shape, bool)
        Cl = Qc @ (W[:, keep] * s[keep])
        Dr = Qd @ Zh[keep].T
        return [(Cl[:, i], Dr[:, i]) for i in range(Cl.shape[1])]


def eval_scalar(f, x, y):
    """Pointwise value ``f(x, y)`` as a Python complex."""
    return complex(np.asarray(f.values(np.asarray(x), np.asarray(y))).reshape(()))


def _check_shapes(A, B, C):
    if A.shape[0] != A.shape[1] or B.shape[0] != B.shape[1]:
        raise ShapeMismatch(f"A {A.shape} and B {B.shape} must be square")
    if C.shape != (A.shape[0], B.shape[0]):
        raise ShapeMismatch(f"C has shape {C.shape}, expected {(A.shape[0], B.shape[0])}")


def hadamard_eval(f, A, B, C):
    """Dense ``f{A,B}(C)`` by two-sided diagonalization.

    This is the verification oracle: exact up to the conditioning of the two
    eigenvector matrices.
    """
    A, B, C = as_matrix(A, "A"), as_matrix(B, "B"), as_matrix(C, "C")
    _check_shapes(A, B, C)
    dA, dB = eig(A), eig(B)
    Ct = dB.inverse_transpose_apply_right(dA.inverse_apply(C))
    F = np.asarray(f.values(dA.eigvals[:, None], dB.eigvals[None, :]))
    if not np.all(np.isfinite(F)):
        raise FunctionUndefined("bivariate function not finite on the eigenvalue grid")
    return dA.eigvecs @ (F * Ct) @ dB.eigvecs.T


def poly_eval_bivariate(p, A, B, C):
    """``sum_ij p[i, j] A^i C (B^T)^j`` by explicit powers (no eigensolver)."""
    p = p.coeffs if isinstance(p, Polynomial) else _coeff_grid(p)
    A, B, C = as_matrix(A, "A"), as_matrix(B, "B"), as_matrix(C, "C")
    _check_shapes(A, B, C)
    dtype = np.result_type(p, A, B, C)
    AiC = [C.astype(dtype)]
    for _ in range(1, p.shape[0]):
        AiC.append(A @ AiC[-1])
    X = np.zeros(C.shape, dtype)
    BjT = np.eye(B.shape[0], dtype=dtype)
    for j in range(p.shape[1]):
        Z = sum(p[i, j] * AiC[i] for i in range(p.shape[0]))
        X = X + Z @ BjT
        BjT = BjT @ B.T
    return X


def sylvester_small(G, H, C, alpha=0.0):
    """Solve ``G X + X H^T + alpha X = C`` for small dense ``G``, ``H``.

    Two-sided diagonalization followed by entrywise division.
    """
    G, H, C = as_matrix(G, "G"), as_matrix(H, "H"), as_matrix(C, "C")
    _check_shapes(G, H, C)
    dG, dH = eig(G), eig(H)
    lam, mu = dG.eigvals[:, None], dH.eigvals[None, :]
    den = alpha + lam + mu
    scale = abs(alpha) + np.abs(lam) + np.abs(mu)
    if np.any((np.abs(den) < POLE_TOL * scale) | (den == 0)):
        raise SingularPencil("alpha + lambda_i + mu_j vanishes for some eigenvalue pair")
    Ct = dH.inverse_transpose_apply_right(dG.inverse_apply(C))
    return dG.eigvecs @ (Ct / den) @ dH.eigvecs.T


def divided_difference_block(f, G, H, C):
    """Upper-right block of ``f([[G, C], [0, H]])``.

    Equals ``f^{[1]}{G, H^T}(C)``. The block matrix is evaluated with the
    dense evaluator attached to ``f`` when present, which stays accurate when
    ``G`` and ``H`` share eigenvalues.
    """
    G, H, C = as_matrix(G, "G"), as_matrix(H, "H"), as_matrix(C, "C")
    _check_shapes(G, H, C)
    k, n = G.shape[0], H.shape[0]
    dtype = np.result_type(G, H, C)
    M = np.zeros((k + n, k + n), dtype)
    M[:k, :k] = G
    M[:k, k:] = C
    M[k:, k:] = H
    F = matrix_function(f, M, method="auto")
    return F[:k, k:]


def eval_compressed(f, G, H, c_tilde, d_tilde):
    """Compressed problem ``X = f{G, H}(c_tilde d_tilde^T)``.

    Dispatches to the evaluator suited to ``f``: the small Sylvester solver,
    the block-triangular embedding for divided differences, explicit monomial
    summation for polynomials and the two-sided diagonalization otherwise.
    """
    C = np.outer(c_tilde, d_tilde)
    if isinstance(f, Sylvester):
        return sylvester_small(G, H, C, f.shift)
    if isinstance(f, DividedDifference):
        return divided_difference_block(f.f, G, np.asarray(H).T, C)
    if isinstance(f, Polynomial):
        return poly_eval_bivariate(f.coeffs, G, H, C)
    return hadamard_eval(f, G, H, C)


def relative_error(X, Y):
    """``||X - Y||_F / ||Y||_F`` (absolute error when ``Y`` vanishes)."""
    ny = frobenius_norm(Y)
    err = frobenius_norm(np.asarray(X) - np.asarray(Y))
    return err / ny if ny > 0 else err
