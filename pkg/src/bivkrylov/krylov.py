"""Arnoldi process with full reorthogonalization.

The state after ``k`` steps is the decomposition

    A U_k = U_k G_k + g_{k+1,k} u_{k+1} e_k^T

with orthonormal ``U_k`` and upper Hessenberg ``G_k``. States are immutable
snapshots; :func:`arnoldi_extend` returns a new state whose leading block
reproduces the old one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse

from .errors import ZeroStartVector

__all__ = [
    "BREAKDOWN_TOL",
    "ArnoldiState",
    "LinearOperator",
    "aslinearoperator",
    "arnoldi",
    "arnoldi_extend",
    "arnoldi_init",
]

BREAKDOWN_TOL = 1e-12
_PROBE_SEED = 7


@dataclass(frozen=True)
class LinearOperator:
    """Matrix-vector product view of a square matrix.

    Build instances with :func:`aslinearoperator`; ``matrix`` keeps the
    underlying dense array, sparse matrix or diagonal vector so that dense
    oracles and transposes can be formed without extra bookkeeping.
    """

    dimension: int
    apply: Callable[[np.ndarray], np.ndarray]
    kind: str
    dtype: np.dtype
    norm_est: float
    matrix: object = None

    def __call__(self, w):
        return self.apply(w)

    def __matmul__(self, w):
        return self.apply(w)

    def transpose(self):
        """Operator applying ``w -> A^T w`` (plain, not conjugate, transpose)."""
        if self.kind == "diagonal":
            return self
        if self.kind in ("dense", "sparse"):
            return aslinearoperator(self.matrix.T)
        raise TypeError("transpose of a callable operator is not available")

    def shifted(self, sigma):
        """Operator ``A + sigma I``."""
        if self.kind == "diagonal":
            return aslinearoperator(self.matrix + sigma)
        if self.kind == "dense":
            return aslinearoperator(self.matrix + sigma * np.eye(self.dimension))
        if self.kind == "sparse":
            eye = scipy.sparse.identity(self.dimension, format="csr")
            return aslinearoperator(self.matrix + sigma * eye)
        apply = self.apply
        return aslinearoperator(lambda w: apply(w) + sigma * w, dimension=self.dimension)

    def to_dense(self):
        """Dense ``ndarray`` of the operator (oracles only)."""
        if self.kind == "dense":
            return np.asarray(self.matrix)
        if self.kind == "sparse":
            return self.matrix.toarray()
        if self.kind == "diagonal":
            return np.diag(self.matrix)
        eye = np.eye(self.dimension)
        return np.column_stack([self.apply(eye[:, j]) for j in range(self.dimension)])


def aslinearoperator(A, dimension=None):
    """Wrap a dense array, sparse matrix, diagonal vector or callable.

    A 1-D array is read as the diagonal of a diagonal matrix. A callable needs
    ``dimension``.
    """
    if isinstance(A, LinearOperator):
        return A
    if scipy.sparse.issparse(A):
        A = scipy.sparse.csr_matrix(A)
        n, n2 = A.shape
        if n != n2:
            raise ValueError(f"operator must be square, got {A.shape}")
        col_norms = np.sqrt(np.asarray(abs(A).power(2).sum(axis=0))).ravel()
        norm = float(col_norms.max()) if n else 0.0
        return LinearOperator(n, A.dot, "sparse", A.dtype, norm, A)
    if callable(A):
        if dimension is None:
            raise ValueError("a callable operator needs an explicit dimension")
        rng = np.random.default_rng(_PROBE_SEED)
        probes = rng.standard_normal((dimension, 4))
        probes /= np.linalg.norm(probes, axis=0)
        images = [np.asarray(A(probes[:, j])) for j in range(probes.shape[1])]
        dtype = np.result_type(*images, float)
        norm = max(float(np.linalg.norm(v)) for v in images)
        return LinearOperator(int(dimension), A, "callable", dtype, norm, None)
    A = np.asarray(A)
    if not np.all(np.isfinite(A)):
        raise ValueError("operator contains NaN or Inf entries")
    if A.ndim == 1:
        d = A.astype(np.result_type(A, float))
        norm = float(np.abs(d).max()) if d.size else 0.0
        return LinearOperator(d.size, lambda w: d * w, "diagonal", d.dtype, norm, d)
    if A.ndim == 2:
        n, n2 = A.shape
        if n != n2:
            raise ValueError(f"operator must be square, got {A.shape}")
        A = A.astype(np.result_type(A, float))
        norm = float(np.linalg.norm(A, axis=0).max()) if n else 0.0
        return LinearOperator(n, A.dot, "dense", A.dtype, norm, A)
    raise TypeError(f"cannot interpret {type(A).__name__} as a linear operator")


def _frozen(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ArnoldiState:
    """Snapshot of an Arnoldi decomposition after ``k`` steps.

    Attributes
    ----------
    basis : ndarray, shape (m, k)
        Orthonormal basis ``U_k`` of the Krylov subspace.
    hess : ndarray, shape (k, k)
        Upper Hessenberg compression ``G_k = U_k^* A U_k``.
    residual_scalar : complex
        ``g_{k+1,k}``.
    residual_vector : ndarray or None
        Unit vector ``u_{k+1}``; ``None`` after breakdown.
    start_norm : float
        ``||c||_2`` of the starting vector.
    broken_down : bool
        The subspace is invariant (to ``BREAKDOWN_TOL * norm_est``).
    norm_est : float
        Norm estimate of the operator used for the breakdown test.
    """

    basis: np.ndarray
    hess: np.ndarray
    residual_scalar: complex
    residual_vector: Optional[np.ndarray]
    start_norm: float
    broken_down: bool
    norm_est: float

    @property
    def k(self):
        return self.basis.shape[1]

    @property
    def dimension(self):
        return self.basis.shape[0]

    def projected_start(self):
        """Coordinates of the starting vector in the basis, ``||c|| e_1``."""
        out = np.zeros(self.k, dtype=self.basis.dtype)
        out[0] = self.start_norm
        return out

    def truncated(self, k):
        """State restricted to the first ``k`` basis vectors.

        The residual of the truncated decomposition is rebuilt from the stored
        Hessenberg entry and basis vector, so nested states compare exactly.
        """
        if not 1 <= k <= self.k:
            raise ValueError(f"cannot truncate a {self.k}-step state to {k}")
        if k == self.k:
            return self
        return ArnoldiState(
            basis=_frozen(self.basis[:, :k].copy()),
            hess=_frozen(self.hess[:k, :k].copy()),
            residual_scalar=self.hess[k, k - 1],
            residual_vector=_frozen(self.basis[:, k].copy()),
            start_norm=self.start_norm,
            broken_down=False,
            norm_est=self.norm_est,
        )


def _orthogonalize(U, w):
    # classical Gram-Schmidt, applied twice
    h = U.conj().T @ w
    w = w - U @ h
    h2 = U.conj().T @ w
    w = w - U @ h2
    return w, h + h2


def arnoldi_init(op, start):
    """Normalize ``start`` and perform the first Arnoldi step.

    Returns the ``k = 1`` state with ``U_1 = start / ||start||`` and
    ``G_1 = U_1^* A U_1``.
    """
    op = aslinearoperator(op)
    start = np.asarray(start)
    if start.shape != (op.dimension,):
        raise ValueError(
            f"start vector has shape {start.shape}, operator dimension is {op.dimension}"
        )
    beta = float(np.linalg.norm(start))
    if beta == 0.0 or not np.isfinite(beta):
        raise ZeroStartVector("Krylov process needs a nonzero, finite start vector")
    dtype = np.result_type(op.dtype, start.dtype, float)
    u = (start / beta).astype(dtype)
    seed = ArnoldiState(
        basis=np.zeros((op.dimension, 0), dtype),
        hess=np.zeros((0, 0), dtype),
        residual_scalar=beta,
        residual_vector=u,
        start_norm=beta,
        broken_down=False,
        norm_est=op.norm_est,
    )
    return _extend(op, seed, 1)


def arnoldi_extend(op, state, steps):
    """Advance an Arnoldi decomposition by ``steps`` steps.

    A state that has already broken down is returned unchanged, since its
    subspace is invariant. The process stops early (with ``broken_down`` set)
    when ``|g_{j+1,j}| <= BREAKDOWN_TOL * norm_est``.
    """
    op = aslinearoperator(op)
    steps = int(steps)
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if state.broken_down or steps == 0:
        return state
    if state.k + steps > op.dimension:
        raise ValueError(
            f"cannot extend a {state.k}-step state by {steps} in dimension {op.dimension}"
        )
    return _extend(op, state, steps)


def _extend(op, state, steps):
    m, k0 = state.basis.shape
    dtype = np.result_type(state.basis.dtype, op.dtype)
    kmax = k0 + steps
    U = np.zeros((m, kmax), dtype)
    U[:, :k0] = state.basis
    G = np.zeros((kmax + 1, kmax), dtype)
    G[:k0, :k0] = state.hess
    if k0 > 0:
        G[k0, k0 - 1] = state.residual_scalar
    u = state.residual_vector
    tol = BREAKDOWN_TOL * op.norm_est
    broken = False
    k = k0
    for j in range(k0, kmax):
        U[:, j] = u
        w = np.asarray(op.apply(u), dtype=dtype)
        w, h = _orthogonalize(U[:, : j + 1], w)
        G[: j + 1, j] = h
        g = float(np.linalg.norm(w))
        G[j + 1, j] = g
        k = j + 1
        if g <= tol:
            broken = True
            u = None
            break
        u = w / g
    return ArnoldiState(
        basis=_frozen(U[:, :k].copy()),
        hess=_frozen(G[:k, :k].copy()),
        residual_scalar=G[k, k - 1],
        residual_vector=None if broken else _frozen(u),
        start_norm=state.start_norm,
        broken_down=broken,
        norm_est=state.norm_est,
    )


def arnoldi(op, start, k):
    """Run ``k`` Arnoldi steps from scratch (fewer on breakdown)."""
    state = arnoldi_init(op, start)
    op = aslinearoperator(op)
    return arnoldi_extend(op, state, min(k, op.dimension) - 1)
