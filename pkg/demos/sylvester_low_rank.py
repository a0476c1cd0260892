"""
Low-rank Sylvester solutions from two Krylov spaces
===================================================

Solve A X + X A^T = c d^T for a 500 x 500 diagonal SPD matrix without ever
forming X. The driver grows both bases until the look-ahead estimate drops
below the tolerance twice in a row.
"""

import numpy as np

from bivkrylov import DriverOptions, Sylvester, approximate, sylvester_residual

n = 500
lam = np.linspace(0.1, 100, n)   # a vector stands for the diagonal matrix
rng = np.random.default_rng(0)
c = rng.standard_normal(n)
d = rng.standard_normal(n)

res = approximate(Sylvester(), lam, lam, (c, d), DriverOptions(tol=1e-8))
print(res)

# the trace holds one (k, l, estimate) row per round
for k, l, e in res.estimate_trace[::10]:
    print(f"k={k:4d}  l={l:4d}  estimate={e:.2e}")

rel = sylvester_residual(lam, lam, res, c, d) / (np.linalg.norm(c) * np.linalg.norm(d))
print("relative residual:", rel)

# storage: two thin bases and a small core instead of n^2 numbers
print("stored numbers:", res.U.size + res.X.size + res.V.size, "vs", n * n)
