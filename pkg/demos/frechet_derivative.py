"""
Frechet derivatives applied to a rank-one direction
===================================================

The derivative of a matrix function in direction c d^T is itself a bivariate
matrix function, built from the divided difference of f. Two Arnoldi runs
(with A and with A^T) approximate it, and the error falls at the same speed
as the plain Arnoldi approximation of f'(A) c.
"""

import numpy as np

from bivkrylov import (
    DriverOptions,
    ExperimentConfig,
    exp_function,
    finite_difference_frechet,
    frechet_apply,
    relative_error,
    run_experiment,
)

rng = np.random.default_rng(1)
n = 100
Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
A = Q @ np.diag(np.linspace(-100, -0.1, n)) @ Q.T
c = rng.standard_normal(n)
d = rng.standard_normal(n)

res = frechet_apply(exp_function(), A, None, c, d, DriverOptions(tol=1e-10))
fd = finite_difference_frechet(exp_function(), A, c, d)
print(res)
print("distance to the finite-difference oracle:", relative_error(res.dense(), fd))

# side by side convergence on the diagonal version of the same spectrum
_, rows = run_experiment(ExperimentConfig("frechet", n=n, k_max=60, functions=("exp",)))
print("   k   Frechet    f'(A)c")
for name, k, fe, ue in rows[4::5]:
    print(f"{k:4d}   {fe:.2e}   {ue:.2e}")
