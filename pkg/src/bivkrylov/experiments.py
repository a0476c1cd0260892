"""Reproducible convergence experiments written as CSV.

Three experiments are available:

``gramian``
    Time-limited Gramians ``f{A,A}(c c^T)`` of a diagonal stable ``A``;
    rows ``(t_s, t_e, k, error, error_fro)``.
``frechet``
    ``Df{A}(c c^T)`` for ``exp`` and ``sqrt(-z)`` next to the Arnoldi
    approximation of ``f'(A) c``; rows ``(f, k, frechet_error, univariate_error)``.
``phi-bounds``
    Approximation bounds for ``phi`` on ``[-4 rho, 0]``; rows
    ``(rho, k, phi_bound, exp_bound_reference, measured_chebyshev_error)``.

Because ``A`` is diagonal, the exact results are entrywise products and the
errors are measured against them directly. Spectral-norm errors come from
power iteration on the dense difference.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
import io
import math
import os
from typing import Optional, Sequence, Tuple

import numpy as np

from .bounds import chebyshev_min_error, exp_bound_reference, phi_bound
from .dense import exp_function, matrix_function, phi_function, sqrt_neg_function
from .driver import approximation_path
from .frechet import frechet_path
from .kernels import DividedDifference, TimeLimited
from .krylov import arnoldi

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "diagonal_test_problem",
    "phi_interpolation_error",
    "run_experiment",
    "spectral_norm",
    "write_csv",
]

EXPERIMENTS = ("gramian", "frechet", "phi-bounds")
SEED_ENV = "BIVKRYLOV_SEED"
INF = math.inf


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment run.

    ``distribution`` is ``"spaced"`` (uniformly spaced eigenvalues, the
    default) or ``"random"`` (seeded uniform samples). ``seed=None`` reads the
    ``BIVKRYLOV_SEED`` environment variable and falls back to 0.
    """

    name: str = "gramian"
    n: int = 500
    interval: Tuple[float, float] = (-100.0, -0.1)
    distribution: str = "spaced"
    times: Sequence[Tuple[float, float]] = ((0.0, INF), (0.1, INF), (1.0, INF), (0.0, 1.0), (0.0, 10.0))
    functions: Sequence[str] = ("exp", "sqrt(-z)")
    k_max: int = 60
    rhos: Sequence[float] = (10.0, 1000.0)
    k_values: Optional[Sequence[int]] = None
    seed: Optional[int] = None
    output: Optional[str] = None

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.n < 1:
            raise ValueError("n must be positive")
        lo, hi = self.interval
        if not lo <= hi:
            raise ValueError("interval must satisfy lo <= hi")
        if self.distribution not in ("spaced", "random"):
            raise ValueError("distribution must be 'spaced' or 'random'")
        if not 1 <= self.k_max <= self.n:
            raise ValueError(f"k_max must lie in [1, {self.n}]")
        for t_s, t_e in self.times:
            if not 0 <= t_s < t_e:
                raise ValueError(f"need 0 <= t_s < t_e, got ({t_s}, {t_e})")
        unknown = set(self.functions) - set(_FRECHET_FUNCTIONS)
        if unknown:
            raise ValueError(f"unknown functions {sorted(unknown)}")
        if any(r <= 0 for r in self.rhos):
            raise ValueError("rho values must be positive")

    def resolved_seed(self):
        if self.seed is not None:
            return int(self.seed)
        return int(os.environ.get(SEED_ENV, "0"))


_FRECHET_FUNCTIONS = {"exp": exp_function, "sqrt(-z)": sqrt_neg_function}


def diagonal_test_problem(n=500, interval=(-100.0, -0.1), distribution="spaced", seed=0):
    """Eigenvalues of a diagonal test matrix and a unit start vector.

    The vector is standard normal (seeded) and normalized.
    """
    rng = np.random.default_rng(seed)
    lo, hi = interval
    if distribution == "spaced":
        lam = np.linspace(lo, hi, n)
    else:
        lam = np.sort(rng.uniform(lo, hi, n))
    c = rng.standard_normal(n)
    return lam, c / np.linalg.norm(c)


def spectral_norm(M, tol=1e-10, maxiter=500, seed=0):
    """Largest singular value of ``M`` by power iteration on ``M^* M``."""
    M = np.asarray(M)
    if M.ndim == 1:
        return float(np.linalg.norm(M))
    if not np.any(M):
        return 0.0
    x = np.random.default_rng(seed).standard_normal(M.shape[1])
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(maxiter):
        y = M.conj().T @ (M @ x)
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        x = y / ny
        new = math.sqrt(ny)
        if abs(new - sigma) <= tol * new:
            return new
        sigma = new
    return sigma


def _gramian_rows(cfg, lam, c):
    rows = []
    ks = list(range(1, cfg.k_max + 1))
    for t_s, t_e in cfg.times:
        f = TimeLimited(t_s, t_e)
        exact = np.asarray(f.values(lam[:, None], lam[None, :])).real * np.outer(c, c)
        for k, res in zip(ks, approximation_path(f, lam, lam, c, c, ks)):
            diff = exact - res.dense().real
            rows.append((t_s, t_e, k, spectral_norm(diff), float(np.linalg.norm(diff))))
    return rows


def _frechet_rows(cfg, lam, c):
    rows = []
    ks = list(range(1, cfg.k_max + 1))
    for name in cfg.functions:
        f = _FRECHET_FUNCTIONS[name]()
        dd = DividedDifference(f)
        exact = np.asarray(dd.values(lam[:, None], lam[None, :])).real * np.outer(c, c)
        exact_vec = (f.deriv(lam) * c).real
        state = arnoldi(lam, c, cfg.k_max)
        fprime = f.derivative()
        for k, res in zip(ks, frechet_path(f, lam, c, c, ks)):
            F = res.dense().real
            uni = _function_vector(fprime, state, k).real
            rows.append((name, k, spectral_norm(exact - F), float(np.linalg.norm(exact_vec - uni))))
    return rows


def _function_vector(f, state, k):
    sub = state.truncated(min(k, state.k))
    return state.start_norm * (sub.basis @ matrix_function(f, sub.hess)[:, 0])


def phi_k_values(rho, count=30):
    """Default sweep for one ``rho``: from the first admissible degree to ``4 rho``."""
    k0 = math.ceil(math.sqrt(4 * rho))
    k1 = max(k0, math.ceil(4 * rho))
    return sorted(set(np.linspace(k0, k1, min(count, k1 - k0 + 1)).round().astype(int).tolist()))


HIGH_PRECISION_MAX_DEGREE = 400


def phi_interpolation_error(k, rho):
    """Grid-measured error of the degree ``k-1`` interpolant of ``phi`` on ``[-4 rho, 0]``.

    Double precision resolves errors down to about ``1e-14`` (``|phi| <= 1``
    there). Smaller values are remeasured in ``mpmath`` with 20 digits below
    :func:`~bivkrylov.bounds.phi_bound`, as long as the degree stays under
    ``HIGH_PRECISION_MAX_DEGREE``; beyond it the double-precision floor is
    returned.
    """
    phi = phi_function()
    measured = chebyshev_min_error(phi, (-4 * rho, 0.0), k - 1)
    if measured < 1e-12 and k - 1 <= HIGH_PRECISION_MAX_DEGREE:
        dps = max(30, 20 - math.floor(phi_bound(k, rho, log=True) / math.log(10)))
        measured = chebyshev_min_error(phi, (-4 * rho, 0.0), k - 1, dps=dps)
    return measured


def _phi_rows(cfg):
    rows = []
    for rho in cfg.rhos:
        ks = [k for k in cfg.k_values if k >= math.sqrt(4 * rho)] if cfg.k_values else phi_k_values(rho)
        for k in ks:
            measured = phi_interpolation_error(k, rho)
            rows.append((rho, k, phi_bound(k, rho), exp_bound_reference(k, rho), measured))
    return rows


HEADERS = {
    "gramian": ("t_s", "t_e", "k", "error", "error_fro"),
    "frechet": ("f", "k", "frechet_error", "univariate_error"),
    "phi-bounds": ("rho", "k", "phi_bound", "exp_bound_reference", "measured_chebyshev_error"),
}


def run_experiment(config):
    """Run an experiment; returns ``(header, rows)``."""
    if config.name == "phi-bounds":
        rows = _phi_rows(config)
    else:
        lam, c = diagonal_test_problem(config.n, config.interval, config.distribution, config.resolved_seed())
        rows = _gramian_rows(config, lam, c) if config.name == "gramian" else _frechet_rows(config, lam, c)
    return HEADERS[config.name], rows


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(header, rows, path=None, comments=(), footer=()):
    """Serialize rows (``repr`` floats, ``.`` decimal, ``\\n`` line ends).

    Returns the text; writes it to ``path`` when given. ``comments`` and
    ``footer`` become ``#`` lines before the header and after the last row.
    """
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    for line in footer:
        buf.write(f"# {line}\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    return text
