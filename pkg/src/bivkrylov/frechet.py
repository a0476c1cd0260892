"""Krylov approximation of Frechet derivatives ``Df{A}(c d^T)``.

``Df{A} = f^{[1]}{A, A^T}``, so the tensorized method applies with Krylov
spaces of ``A`` (started at ``c``) and ``A^T`` (started at ``d``) of equal
depth. The compressed divided difference is read off the upper-right block of
``f([[G_k, c_t d_t^T], [0, H_k^T]])``.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .dense import frobenius_norm, matrix_function
from .driver import DriverOptions, approximate, approximate_fixed, approximation_path
from .kernels import DividedDifference, divided_difference_block
from .krylov import arnoldi, aslinearoperator

__all__ = [
    "arnoldi_function_vector",
    "finite_difference_frechet",
    "frechet_apply",
    "frechet_fixed",
    "frechet_path",
    "frechet_reduced",
]


def frechet_reduced(f, G, H, c_tilde, d_tilde):
    """Compressed Frechet core: upper-right ``k x k`` block of ``f([[G, c d^T], [0, H^T]])``."""
    H = np.asarray(H)
    return divided_difference_block(f, G, H.T, np.outer(c_tilde, d_tilde))


def _transpose_op(A, A_transpose):
    if A_transpose is not None:
        return aslinearoperator(A_transpose)
    return aslinearoperator(A).transpose()


def frechet_apply(f, A, A_transpose, c, d, opts=None):
    """Adaptive approximation of ``Df{A}(c d^T)``.

    ``A_transpose`` applies ``w -> A^T w``; pass ``None`` to derive it from a
    dense, sparse or diagonal ``A``. Both Krylov spaces always have the same
    dimension, and stopping follows :func:`bivkrylov.driver.approximate`.
    """
    opts = DriverOptions() if opts is None else opts
    opA = aslinearoperator(A)
    depth = opts.k_max if opts.k_max is not None else opA.dimension
    opts = replace(opts, balance=False, k_max=depth, l_max=depth)
    return approximate(DividedDifference(f), opA, _transpose_op(A, A_transpose), (c, d), opts)


def frechet_fixed(f, A, c, d, k, A_transpose=None):
    """Frechet approximation with ``k`` Arnoldi steps on each side."""
    return approximate_fixed(DividedDifference(f), A, _transpose_op(A, A_transpose), c, d, k, k)


def frechet_path(f, A, c, d, ks, A_transpose=None):
    """Frechet approximations for a sweep of depths (one pair of Arnoldi runs)."""
    return approximation_path(DividedDifference(f), A, _transpose_op(A, A_transpose), c, d, ks)


def arnoldi_function_vector(f, A, c, k):
    """Standard Arnoldi approximation ``||c|| U_k f(G_k) e_1`` of ``f(A) c``."""
    state = arnoldi(A, np.asarray(c), k)
    F = matrix_function(f, state.hess, method="auto")
    return state.start_norm * (state.basis @ F[:, 0])


def finite_difference_frechet(f, A, c, d, eps=None):
    """Finite-difference oracle for ``Df{A}(c d^T)`` on a dense ``A``.

    Central differences ``D(e) = (f(A + eE) - f(A - eE)) / (2e)`` at ``e`` and
    ``e/2`` combined by one Richardson step, ``(4 D(e/2) - D(e)) / 3``. The
    default step is ``1e-5 ||A||_F / ||c d^T||_F``. Matrix functions go through
    :func:`bivkrylov.dense.matrix_function` (eigendecomposition).
    """
    A = aslinearoperator(A).to_dense()
    E = np.outer(c, d)
    if eps is None:
        eps = 1e-5 * frobenius_norm(A) / frobenius_norm(E)

    def central(h):
        return (matrix_function(f, A + h * E) - matrix_function(f, A - h * E)) / (2 * h)

    return (4 * central(eps / 2) - central(eps)) / 3
