"""A-priori error bounds for the tensorized Krylov method.

For Hermitian ``A``, ``B`` with numerical ranges inside intervals ``E_A``,
``E_B`` and a function of the form ``f(x, y) = g(x + y)``, the error after
``k`` steps on both sides is bounded by

    2 M ||c|| ||d|| min_{p in P_{k-1}} max_{z in E_A + E_B} |g(z) - p(z)|,

where ``E_A + E_B`` is the Minkowski sum. The univariate minimum is replaced
by a computable near-best proxy (:func:`chebyshev_min_error`).

The module also holds explicit bounds for polynomial approximation of
``phi(z) = (exp(z) - 1) / z`` on ``[-4 rho, 0]`` and, for comparison, the
classical two-regime bounds for the exponential.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Optional

import mpmath
import numpy as np
from numpy.polynomial import chebyshev as C
import scipy.fft

from .dense import ScalarFunction, as_matrix
from .errors import (
    DegenerateGeometry,
    EvaluationFailure,
    OutOfRegime,
    SingularityInsideInterval,
    UnsupportedGeometry,
)
from .kernels import FrequencyLimited, Polynomial, SumShift, Sylvester, TimeLimited
from .krylov import LinearOperator

__all__ = [
    "CROUZEIX_PALENCIA",
    "BoundParams",
    "SpectralInterval",
    "bernstein_rate",
    "chebyshev_min_error",
    "exp_bound_reference",
    "frechet_bound",
    "m_constant",
    "numerical_range_interval",
    "numerical_range_rectangle",
    "phi_bound",
    "phi_optimal_radius",
    "sum_function",
    "theorem_bound",
]

CROUZEIX_PALENCIA = 1 + math.sqrt(2)
GRID_POINTS = 2000


@dataclass(frozen=True)
class SpectralInterval:
    """Real interval ``[lo, hi]`` enclosing a Hermitian numerical range."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("interval endpoints must be finite")
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __add__(self, other):
        """Minkowski sum."""
        return SpectralInterval(self.lo + other.lo, self.hi + other.hi)

    @property
    def width(self):
        return self.hi - self.lo

    def from_unit(self, x):
        """Affine map ``[-1, 1] -> [lo, hi]``."""
        return (self.lo + self.hi) / 2 + self.width / 2 * np.asarray(x)


def _dense(A):
    if isinstance(A, LinearOperator):
        return A.to_dense()
    A = np.asarray(A)
    return np.diag(A) if A.ndim == 1 else as_matrix(A)


def numerical_range_interval(A, hermitian=True):
    """Extent ``[lambda_min, lambda_max]`` of the Hermitian part of ``A``.

    For Hermitian ``A`` this is exactly the numerical range. Otherwise it is
    the projection of the numerical range onto the real axis, which is all
    this module's interval bounds can use; ``hermitian=True`` then raises.
    """
    A = _dense(A)
    herm = (A + A.conj().T) / 2
    if hermitian:
        skew = np.linalg.norm(A - herm)
        if skew > 1e-12 * max(np.linalg.norm(A), np.finfo(float).tiny):
            raise ValueError("matrix is not Hermitian; pass hermitian=False")
    vals = np.linalg.eigvalsh(herm)
    return SpectralInterval(vals[0], vals[-1])


def numerical_range_rectangle(A):
    """Bounding box of the numerical range from the Hermitian and skew parts.

    Returns ``(real_interval, imag_interval)``.
    """
    A = _dense(A)
    herm = (A + A.conj().T) / 2
    skew = (A - A.conj().T) / 2j
    re = np.linalg.eigvalsh(herm)
    im = np.linalg.eigvalsh(skew)
    return SpectralInterval(re[0], re[-1]), SpectralInterval(im[0], im[-1])


@dataclass(frozen=True)
class BoundParams:
    """Inputs to the norm-bound constant ``M``.

    ``boundary_length_*`` is the length of the boundary of the enclosing set,
    ``distance_*`` the distance of that boundary from the numerical range.
    Both are only needed when neither matrix is normal.
    """

    normal_A: bool = True
    normal_B: bool = True
    boundary_length_A: Optional[float] = None
    boundary_length_B: Optional[float] = None
    distance_A: Optional[float] = None
    distance_B: Optional[float] = None


def m_constant(params):
    """Constant ``M`` with ``||f{A,B}|| <= M max |f|`` over the enclosing sets.

    1 when both matrices are normal, ``1 + sqrt(2)`` when one is, otherwise
    ``(1 + sqrt(2)) / (2 pi) * min(len_A / dist_A, len_B / dist_B)`` over the
    sides with positive distance.
    """
    if params.normal_A and params.normal_B:
        return 1.0
    if params.normal_A or params.normal_B:
        return CROUZEIX_PALENCIA
    ratios = []
    for length, dist in (
        (params.boundary_length_A, params.distance_A),
        (params.boundary_length_B, params.distance_B),
    ):
        if length is not None and dist is not None and dist > 0 and length >= 0:
            ratios.append(length / dist)
    if not ratios:
        raise DegenerateGeometry("need a positive boundary distance on at least one side")
    return CROUZEIX_PALENCIA / (2 * math.pi) * min(ratios)


def _values(g, z):
    with np.errstate(all="ignore"):
        try:
            vals = np.asarray(g(z), dtype=complex)
        except (ZeroDivisionError, FloatingPointError, ValueError, ArithmeticError) as exc:
            raise EvaluationFailure(str(exc)) from exc
    if vals.shape != np.shape(z):
        vals = np.broadcast_to(vals, np.shape(z))
    if not np.all(np.isfinite(vals)):
        raise EvaluationFailure("function is not finite on the interval")
    return vals


def _grid_error(g, coeffs, interval, points):
    # Chebyshev-distributed plus uniform samples, endpoints included
    x = np.unique(np.concatenate([np.cos(np.linspace(0, np.pi, points)), np.linspace(-1, 1, points)]))
    err = _values(g, interval.from_unit(x)) - C.chebval(x, coeffs)
    if np.max(np.abs(err.imag)) <= 1e-14 * max(1.0, np.max(np.abs(err.real))):
        e = err.real
        # best constant offset keeps the degree and halves the error spread
        return float((e.max() - e.min()) / 2)
    return float(np.max(np.abs(err)))


def chebyshev_min_error(g, interval, degree, points=GRID_POINTS, dps=None):
    """Near-best uniform approximation error of ``g`` on ``interval``.

    The approximant is the Chebyshev interpolant of the given degree (first
    kind nodes), shifted by the constant that balances its real error. The
    returned value is its error measured on a grid of ``points`` samples,
    refined once when doubling the grid changes it by more than 1%. The grid
    never has fewer than ``4 * (degree + 1)`` points. The value bounds
    the true minimum from above (up to the grid resolution); it is not the
    exact infimum.

    With ``dps`` set, the computation runs in ``mpmath`` at that many decimal
    digits using ``g.mp`` (a scalar ``mpmath`` evaluator), which resolves
    errors far below double-precision roundoff.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if not isinstance(interval, SpectralInterval):
        interval = SpectralInterval(*interval)
    # the grid must resolve the oscillations of a high-degree error curve
    points = max(int(points), 4 * (degree + 1))
    if dps is not None:
        return _chebyshev_min_error_mp(g, interval, degree, points, dps)
    nodes = C.chebpts1(degree + 1)
    vals = _values(g, interval.from_unit(nodes))
    if interval.width == 0:
        return 0.0
    coeffs = _cheb_coeffs(vals)
    err = _grid_error(g, coeffs, interval, points)
    fine = _grid_error(g, coeffs, interval, 2 * points)
    if abs(fine - err) > 0.01 * max(err, fine):
        return max(err, fine)
    return err


def _cheb_coeffs(vals):
    # interpolant at first-kind points: DCT-II of the values in descending-node order
    n = vals.size
    v = vals[::-1]
    coeffs = (scipy.fft.dct(v.real, type=2) + 1j * scipy.fft.dct(v.imag, type=2)) / n
    coeffs[0] /= 2
    return coeffs


def _mp_cheb_coeffs(values, nodes):
    n = len(nodes)
    coeffs = [mpmath.mpf(0)] * n
    for xj, vj in zip(nodes, values):
        t_prev, t = mpmath.mpf(1), xj
        coeffs[0] += vj
        for m in range(1, n):
            coeffs[m] += vj * t
            t_prev, t = t, 2 * xj * t - t_prev
    coeffs = [2 * cm / n for cm in coeffs]
    coeffs[0] /= 2
    return coeffs


def _chebyshev_min_error_mp(g, interval, degree, points, dps):
    # The interpolant is built from high-precision samples. Its error is then
    # expanded in Chebyshev polynomials by subtracting it from a longer
    # expansion of g; those coefficients are as small as the error itself, so
    # summing the series on the grid in double precision loses nothing.
    g_mp = getattr(g, "mp", None)
    if g_mp is None:
        raise EvaluationFailure("high-precision evaluation needs a function with an 'mp' evaluator")
    if interval.width == 0:
        return 0.0
    with mpmath.workdps(dps):
        lo, hi = mpmath.mpf(interval.lo), mpmath.mpf(interval.hi)
        mid, half = (lo + hi) / 2, (hi - lo) / 2

        def expansion(n):
            x = [mpmath.cos(mpmath.pi * (j + mpmath.mpf(1) / 2) / n) for j in range(n)]
            return _mp_cheb_coeffs([mpmath.re(g_mp(mid + half * xj)) for xj in x], x)

        n = degree + 1
        interp = expansion(n)
        length = 2 * n + 16
        while True:
            full = expansion(length)
            err_coeffs = [a - (interp[m] if m < n else 0) for m, a in enumerate(full)]
            size = max(abs(b) for b in err_coeffs)
            tail = max(abs(b) for b in err_coeffs[-8:])
            if size == 0 or tail <= mpmath.mpf(2) ** -40 * size or length > 8 * n + 64:
                break
            length *= 2
        scale = size if size > 0 else mpmath.mpf(1)
        b = np.array([float(bm / scale) for bm in err_coeffs])
    scale = float(scale)

    def spread(npts):
        x = np.unique(np.concatenate([np.cos(np.linspace(0, np.pi, npts)), np.linspace(-1, 1, npts)]))
        e = C.chebval(x, b)
        return float((e.max() - e.min()) / 2) * scale

    err = spread(points)
    fine = spread(2 * points)
    if abs(fine - err) > 0.01 * max(err, fine):
        err = max(err, fine)
    return err


def sum_function(f, interval=None):
    """Univariate ``g`` with ``f(x, y) = g(x + y)`` on the relevant real sets.

    ``interval`` (the Minkowski sum) is only consulted for
    :class:`FrequencyLimited`, which reduces to ``-1/s`` (resp. ``1/s``) on
    negative (resp. positive) real arguments when ``w1 = 0`` and
    ``w2 = inf``.
    """
    if isinstance(f, SumShift):
        return f.g
    if isinstance(f, Sylvester):
        shift = f.shift
        return ScalarFunction(lambda s: 1.0 / (shift + np.asarray(s, dtype=complex)), name="1/(a+s)")
    if isinstance(f, TimeLimited):
        return ScalarFunction(lambda s: f.values(s, np.zeros_like(s)), name="time-limited g")
    if isinstance(f, FrequencyLimited):
        if f.w1 == 0 and math.isinf(f.w2) and interval is not None:
            if interval.hi < 0:
                return ScalarFunction(lambda s: -1.0 / np.asarray(s, dtype=complex), name="-1/s")
            if interval.lo > 0:
                return ScalarFunction(lambda s: 1.0 / np.asarray(s, dtype=complex), name="1/s")
        raise UnsupportedGeometry("frequency-limited kernel is not a function of x + y here")
    raise UnsupportedGeometry(f"{type(f).__name__} is not of the form g(x + y)")


def theorem_bound(f, E_A, E_B, k, M=1.0, c_norm=1.0, d_norm=1.0, dps=None):
    """Bound on ``||f{A,B}(c d^T) - U_k X_{k,k} V_k^T||_F`` for Hermitian ``A``, ``B``.

    ``2 M ||c|| ||d|| * chebyshev_min_error(g, E_A + E_B, k - 1)`` for
    ``f = g(x + y)``. Polynomials of degree at most ``(k-1, k-1)`` are
    reproduced exactly and give 0. ``dps`` is forwarded to
    :func:`chebyshev_min_error` (``g`` then needs an ``mp`` evaluator).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if isinstance(f, Polynomial):
        dx, dy = f.degree
        if dx <= k - 1 and dy <= k - 1:
            return 0.0
        raise UnsupportedGeometry("bivariate polynomial of higher degree is not handled")
    S = E_A + E_B
    g = sum_function(f, S)
    return 2 * M * c_norm * d_norm * chebyshev_min_error(g, S, k - 1, dps=dps)


def frechet_bound(f, E_A, k, M=1.0, c_norm=1.0, d_norm=1.0):
    """Bound on the Frechet approximation error after ``k`` steps.

    ``2 M ||c|| ||d|| * chebyshev_min_error(f', E_A, k - 1)``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    return 2 * M * c_norm * d_norm * chebyshev_min_error(f.derivative(), E_A, k - 1)


def bernstein_rate(interval, singularity):
    """Parameter ``rho`` of the Bernstein ellipse through ``singularity``.

    The interval is mapped affinely to ``[-1, 1]``; with ``xi`` the image of
    the singularity, ``rho = |xi + sqrt(xi^2 - 1)|`` on the branch with modulus
    at least 1. Near-best polynomial approximation errors decay like
    ``rho^{-k}``.
    """
    if not isinstance(interval, SpectralInterval):
        interval = SpectralInterval(*interval)
    z = complex(singularity)
    if z.imag == 0 and interval.lo <= z.real <= interval.hi:
        raise SingularityInsideInterval(f"singularity {z} lies in [{interval.lo}, {interval.hi}]")
    if interval.width == 0:
        return math.inf
    xi = (2 * z - (interval.lo + interval.hi)) / interval.width
    root = np.sqrt(xi * xi - 1 + 0j)
    return float(max(abs(xi + root), abs(xi - root)))


def phi_bound(k, rho, log=False):
    """Bound on the best degree ``k-1`` approximation error of ``phi`` on ``[-4 rho, 0]``.

    ``40 rho^2 / k^3 exp(-k^2 / (5 rho))`` for ``sqrt(4 rho) <= k <= 2 rho`` and
    ``8 / (3k - 5 rho) (e rho / (k + 2 rho))^k`` for ``k >= 2 rho``; at
    ``k = 2 rho`` the smaller value is returned. With ``log=True`` the natural
    logarithm is returned, which stays finite where the value underflows.
    """
    k, rho = float(k), float(rho)
    if rho <= 0:
        raise ValueError("rho must be positive")
    if k < math.sqrt(4 * rho):
        raise OutOfRegime(f"k={k:g} below sqrt(4 rho)={math.sqrt(4 * rho):.4g}")
    first = math.log(40 * rho**2 / k**3) - k**2 / (5 * rho)
    second = math.inf
    if k >= 2 * rho or math.isclose(k, 2 * rho, rel_tol=1e-12):
        second = math.log(8 / (3 * k - 5 * rho)) + k * math.log(math.e * rho / (k + 2 * rho))
    if math.isclose(k, 2 * rho, rel_tol=1e-12):
        value = min(first, second)
    else:
        value = first if k < 2 * rho else second
    return value if log else math.exp(value)


def phi_optimal_radius(k, rho):
    """Radius ``r = k/(2 rho) + sqrt(k^2/(4 rho^2) + 1)`` minimizing the contour estimate."""
    if k <= 0 or rho <= 0:
        raise ValueError("k and rho must be positive")
    t = k / (2 * rho)
    return t + math.sqrt(t * t + 1)


def exp_bound_reference(k, rho, log=False):
    """Classical two-regime bound for polynomial approximation of ``exp`` on ``[-4 rho, 0]``.

    ``10 exp(-k^2 / (5 rho))`` for ``sqrt(4 rho) <= k <= 2 rho`` and
    ``(10 / k) exp(-rho) (e rho / k)^k`` for ``k >= 2 rho``. With ``log=True``
    the natural logarithm is returned.

    These formulas come from an external convergence analysis of Krylov
    approximations to the matrix exponential; they are quoted, not derived
    here, and exist only to compare against :func:`phi_bound`.
    """
    k, rho = float(k), float(rho)
    if rho <= 0:
        raise ValueError("rho must be positive")
    if k < math.sqrt(4 * rho):
        raise OutOfRegime(f"k={k:g} below sqrt(4 rho)={math.sqrt(4 * rho):.4g}")
    if k <= 2 * rho:
        value = math.log(10) - k**2 / (5 * rho)
    else:
        value = math.log(10 / k) - rho + k * math.log(math.e * rho / k)
    return value if log else math.exp(value)
