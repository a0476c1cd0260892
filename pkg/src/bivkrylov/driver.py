"""Tensorized Krylov approximation of ``f{A,B}(C)`` for low-rank ``C``.

For ``C = c d^T`` two Arnoldi processes build orthonormal bases ``U_k`` of
``K_k(A, c)`` and ``V_l`` of ``K_l(B, d)``; the approximation is
``U_k X_{k,l} V_l^T`` with the compressed core

    X_{k,l} = f{G_k, H_l}(||c|| e_1 (||d|| e_1)^T).

The bases are grown until the look-ahead difference

    e_{k,l,h} = || X_{k+h,l+h} - [[X_{k,l}, 0], [0, 0]] ||_F

drops below ``tol * ||c|| ||d||`` for two consecutive rounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import enum
import logging
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from .dense import frobenius_norm
from .errors import ShapeMismatch
from .kernels import LowRankRhs, eval_compressed
from .krylov import ArnoldiState, arnoldi_extend, arnoldi_init, aslinearoperator

__all__ = [
    "ApproximationResult",
    "DriverOptions",
    "Termination",
    "approximate",
    "approximate_fixed",
    "approximation_path",
    "error_estimate",
    "lowrank_frobenius_norm",
    "side_selection",
    "sylvester_residual",
    "stein_residual",
]

log = logging.getLogger(__name__)

TIE_TOL = 1e-14


class Termination(enum.Enum):
    CONVERGED = "converged"
    BUDGET_EXHAUSTED = "budget_exhausted"
    BREAKDOWN = "breakdown"
    FIXED = "fixed"


@dataclass(frozen=True)
class DriverOptions:
    """Stopping and growth parameters.

    Parameters
    ----------
    tol
        Stop when ``e_{k,l,h} <= tol * ||c|| ||d||`` in ``confirm`` consecutive
        rounds.
    h
        Look-ahead window of the error estimate.
    k_max, l_max
        Basis size budgets; ``None`` means the full dimension.
    step
        Basis growth per round; defaults to ``h`` so that every look-ahead core
        becomes the next round's core.
    balance
        Grow ``k`` and ``l`` separately, choosing the side whose one-sided
        look-ahead changes the core more.
    split
        Rank-r handling: ``"svd"`` splits ``C`` into orthogonal rank-1 terms,
        ``"terms"`` uses the stored factors as given.
    """

    tol: float = 1e-8
    h: int = 2
    k_max: Optional[int] = None
    l_max: Optional[int] = None
    step: Optional[int] = None
    balance: bool = False
    confirm: int = 2
    k_start: int = 1
    split: str = "svd"

    def __post_init__(self):
        if not self.tol >= 0:
            raise ValueError("tol must be nonnegative")
        if self.h < 1:
            raise ValueError("h must be at least 1")
        if self.step is not None and self.step < 1:
            raise ValueError("step must be at least 1")
        if self.confirm < 1:
            raise ValueError("confirm must be at least 1")
        if self.k_start < 1:
            raise ValueError("k_start must be at least 1")
        if self.split not in ("svd", "terms"):
            raise ValueError(f"unknown split {self.split!r}")

    @property
    def growth(self):
        return self.h if self.step is None else self.step


@dataclass
class ApproximationResult:
    """Factored approximation ``U @ X @ V.T``.

    ``estimate_trace`` holds ``(k, l, e)`` per round, where ``(k, l)`` is the
    core the estimate was measured from. ``states`` keeps the two Arnoldi
    snapshots of a rank-1 run; ``terms`` keeps the per-term results of a
    rank-r run.
    """

    U: np.ndarray
    X: np.ndarray
    V: np.ndarray
    estimate_trace: List[Tuple[int, int, float]] = field(default_factory=list)
    termination: Termination = Termination.FIXED
    states: Optional[Tuple[ArnoldiState, ArnoldiState]] = None
    terms: List["ApproximationResult"] = field(default_factory=list)

    @property
    def k(self):
        return self.U.shape[1]

    @property
    def l(self):
        return self.V.shape[1]

    def dense(self):
        return self.U @ self.X @ self.V.T

    def __repr__(self):
        last = self.estimate_trace[-1][2] if self.estimate_trace else float("nan")
        return (
            f"ApproximationResult(k={self.k}, l={self.l}, "
            f"termination={self.termination.value}, last_estimate={last:.3g})"
        )


def error_estimate(core_small, core_big):
    """Frobenius norm of ``core_big`` minus ``core_small`` zero-padded to its shape.

    With nested orthonormal bases this equals
    ``||U_big X_big V_big^T - U_small X_small V_small^T||_F``.
    """
    small = np.atleast_2d(np.asarray(core_small))
    big = np.atleast_2d(np.asarray(core_big))
    if core_small is not None and np.asarray(core_small).size == 0:
        small = np.zeros((0, 0))
    if small.shape[0] > big.shape[0] or small.shape[1] > big.shape[1]:
        raise ShapeMismatch(f"core {small.shape} does not fit into {big.shape}")
    diff = np.array(big, dtype=np.result_type(big, small, float))
    diff[: small.shape[0], : small.shape[1]] -= small
    return frobenius_norm(diff)


def _side(diff_k, diff_l):
    if abs(diff_k - diff_l) <= TIE_TOL * max(diff_k, diff_l):
        return "both"
    return "A" if diff_k >= diff_l else "B"


def side_selection(core_grow_k, core_grow_l, core):
    """Choose which basis to enlarge: ``"A"``, ``"B"`` or ``"both"`` on a tie."""
    return _side(error_estimate(core, core_grow_k), error_estimate(core, core_grow_l))


class _Side:
    """One Arnoldi process grown on demand."""

    def __init__(self, op, start):
        self.op = op
        self.state = arnoldi_init(op, start)
        self.start_norm = self.state.start_norm

    def reach(self, size):
        """Grow the basis towards ``size``; return the size actually available."""
        st = self.state
        if st.k < size and not st.broken_down:
            self.state = arnoldi_extend(self.op, st, size - st.k)
        return min(size, self.state.k)

    def frozen(self, size):
        return self.state.broken_down and size >= self.state.k

    def hess(self, k):
        return self.state.hess[:k, :k]

    def start(self, k):
        out = np.zeros(k, dtype=self.state.basis.dtype)
        out[0] = self.start_norm
        return out

    def basis(self, k):
        return self.state.basis[:, :k]


class _Cores:
    def __init__(self, f, a, b):
        self.f, self.a, self.b = f, a, b
        self._cache = {}

    def __call__(self, k, l):
        key = (k, l)
        if key not in self._cache:
            self._cache[key] = eval_compressed(
                self.f, self.a.hess(k), self.b.hess(l), self.a.start(k), self.b.start(l)
            )
        return self._cache[key]


def _budget(value, dim, name):
    if value is None:
        return dim
    if not 1 <= value <= dim:
        raise ValueError(f"{name}={value} must lie in [1, {dim}]")
    return int(value)


def _rank_one(f, opA, opB, c, d, opts):
    a, b = _Side(opA, c), _Side(opB, d)
    k_max = _budget(opts.k_max, opA.dimension, "k_max")
    l_max = _budget(opts.l_max, opB.dimension, "l_max")
    cores = _Cores(f, a, b)
    threshold = opts.tol * a.start_norm * b.start_norm
    step = opts.growth

    k = a.reach(min(opts.k_start, k_max))
    l = b.reach(min(opts.k_start, l_max))
    X = cores(k, l)
    trace = []
    hits = 0
    termination = None
    while termination is None:
        kn = a.reach(min(k + step, k_max))
        ln = b.reach(min(l + step, l_max))
        if kn == k and ln == l:
            exact = a.frozen(k) and b.frozen(l)
            termination = Termination.BREAKDOWN if exact else Termination.BUDGET_EXHAUSTED
            break
        X_next = cores(kn, ln)
        e = error_estimate(X, X_next)
        trace.append((k, l, e))
        log.debug("k=%d l=%d estimate=%.3e", k, l, e)
        if opts.balance and kn > k and ln > l:
            side = side_selection(cores(kn, l), cores(k, ln), X)
            if side == "A":
                ln = l
            elif side == "B":
                kn = k
            X_next = cores(kn, ln)
        hits = hits + 1 if e <= threshold else 0
        k, l, X = kn, ln, X_next
        if hits >= opts.confirm:
            termination = Termination.CONVERGED

    return ApproximationResult(
        U=a.basis(k),
        X=X,
        V=b.basis(l),
        estimate_trace=trace,
        termination=termination,
        states=(a.state, b.state),
    )


def _orthonormal_frame(F, rtol=1e-12):
    W, s, Zh = np.linalg.svd(F, full_matrices=False)
    keep = s > rtol * s[0]
    return W[:, keep], s[keep, None] * Zh[keep]


def _combine(results):
    U_all = np.hstack([r.U for r in results])
    V_all = np.hstack([r.V for r in results])
    X_all = scipy.linalg.block_diag(*[r.X for r in results])
    Wu, Ku = _orthonormal_frame(U_all)
    Wv, Kv = _orthonormal_frame(V_all)
    return Wu, Ku @ X_all @ Kv.T, Wv


def _as_rhs(C):
    if isinstance(C, LowRankRhs):
        return C
    c, d = C
    c, d = np.asarray(c), np.asarray(d)
    if c.ndim == 1:
        return LowRankRhs.rank_one(c, d)
    return LowRankRhs(c, d)


def approximate(f, A, B, C, opts=None):
    """Adaptive Krylov approximation of ``f{A,B}(C)``.

    Parameters
    ----------
    f
        A bivariate function from :mod:`bivkrylov.kernels`.
    A, B
        Square operators (dense, sparse, diagonal vector or
        :class:`~bivkrylov.krylov.LinearOperator`).
    C
        :class:`~bivkrylov.kernels.LowRankRhs` or a pair ``(c, d)`` of vectors
        or factor matrices.
    opts
        :class:`DriverOptions`.

    Returns
    -------
    ApproximationResult
        Budget exhaustion is reported through ``termination``, not raised.
    """
    opts = DriverOptions() if opts is None else opts
    opA, opB = aslinearoperator(A), aslinearoperator(B)
    rhs = _as_rhs(C)
    if rhs.shape != (opA.dimension, opB.dimension):
        raise ShapeMismatch(f"C has shape {rhs.shape}, operators {opA.dimension}, {opB.dimension}")
    if rhs.rank == 1:
        return _rank_one(f, opA, opB, rhs.left[:, 0], rhs.right[:, 0], opts)

    pairs = rhs.svd_terms() if opts.split == "svd" else rhs.terms()
    results = [_rank_one(f, opA, opB, c, d, opts) for c, d in pairs]
    U, X, V = _combine(results)
    statuses = {r.termination for r in results}
    if Termination.BUDGET_EXHAUSTED in statuses:
        termination = Termination.BUDGET_EXHAUSTED
    elif statuses == {Termination.BREAKDOWN}:
        termination = Termination.BREAKDOWN
    else:
        termination = Termination.CONVERGED
    trace = [entry for r in results for entry in r.estimate_trace]
    return ApproximationResult(U, X, V, trace, termination, None, results)


def approximate_fixed(f, A, B, c, d, k, l=None):
    """Non-adaptive approximation with prescribed basis sizes ``k``, ``l``.

    Sizes shrink automatically when a Krylov space becomes invariant earlier.
    """
    l = k if l is None else l
    opA, opB = aslinearoperator(A), aslinearoperator(B)
    a, b = _Side(opA, np.asarray(c)), _Side(opB, np.asarray(d))
    k, l = a.reach(k), b.reach(l)
    X = _Cores(f, a, b)(k, l)
    return ApproximationResult(a.basis(k), X, b.basis(l), [], Termination.FIXED, (a.state, b.state))


def approximation_path(f, A, B, c, d, ks, ls=None):
    """Approximations for a sweep of basis sizes sharing one pair of Arnoldi runs.

    ``ls`` defaults to ``ks`` (equal depths). Returns a list of
    :class:`ApproximationResult` in sweep order.
    """
    ls = list(ks) if ls is None else list(ls)
    ks = list(ks)
    if len(ks) != len(ls):
        raise ValueError("ks and ls must have equal length")
    opA, opB = aslinearoperator(A), aslinearoperator(B)
    a, b = _Side(opA, np.asarray(c)), _Side(opB, np.asarray(d))
    a.reach(max(ks))
    b.reach(max(ls))
    cores = _Cores(f, a, b)
    out = []
    for k, l in zip(ks, ls):
        k, l = min(k, a.state.k), min(l, b.state.k)
        out.append(ApproximationResult(a.basis(k), cores(k, l), b.basis(l)))
    return out


def lowrank_frobenius_norm(L, R):
    """``||L @ R.T||_F`` without forming the product."""
    _, RL = np.linalg.qr(L)
    _, RR = np.linalg.qr(R)
    return frobenius_norm(RL @ RR.T)


def sylvester_residual(A, B, result, c, d, shift=0.0):
    """``||A Xt + Xt B^T + shift Xt - c d^T||_F`` for ``Xt = U X V^T``."""
    opA, opB = aslinearoperator(A), aslinearoperator(B)
    U, X, V = result.U, result.X, result.V
    AU = np.column_stack([opA(U[:, j]) for j in range(U.shape[1])])
    BV = np.column_stack([opB(V[:, j]) for j in range(V.shape[1])])
    c, d = np.asarray(c).reshape(-1, 1), np.asarray(d).reshape(-1, 1)
    L = np.hstack([AU + shift * U, U, c])
    R = np.hstack([V @ X.T, BV @ X.T, -d])
    return lowrank_frobenius_norm(L, R)


def stein_residual(A, B, result, c, d):
    """``||Xt - A Xt B^T - c d^T||_F`` for ``Xt = U X V^T``."""
    opA, opB = aslinearoperator(A), aslinearoperator(B)
    U, X, V = result.U, result.X, result.V
    AU = np.column_stack([opA(U[:, j]) for j in range(U.shape[1])])
    BV = np.column_stack([opB(V[:, j]) for j in range(V.shape[1])])
    c, d = np.asarray(c).reshape(-1, 1), np.asarray(d).reshape(-1, 1)
    L = np.hstack([U, AU, c])
    R = np.hstack([V @ X.T, -BV @ X.T, -d])
    return lowrank_frobenius_norm(L, R)
