"""
Time-limited Gramians
=====================

The controllability Gramian restricted to a time window [t_s, t_e] is the
bivariate function (exp(t_e s) - exp(t_s s)) / s, s = x + y, applied to
c c^T. With a diagonal test matrix the exact answer is an entrywise product,
so the error of every Krylov depth can be measured directly.

An infinite horizon converges geometrically, at the rate set by the pole of
1/s next to the spectrum. A finite horizon removes the pole and convergence
becomes superlinear.
"""

import math

import numpy as np

from bivkrylov import ExperimentConfig, bernstein_rate, run_experiment

cfg = ExperimentConfig("gramian", times=((0.0, math.inf), (0.0, 1.0)), k_max=60)
header, rows = run_experiment(cfg)

print("   k   [0, inf)     [0, 1]")
table = {}
for t_s, t_e, k, err, _ in rows:
    table.setdefault(k, {})[t_e] = err
for k in range(5, 61, 5):
    print(f"{k:4d}   {table[k][math.inf]:.2e}   {table[k][1.0]:.2e}")

# predicted geometric rate: sum of the spectra is [-200, -0.2], pole at 0
print("predicted rate:", bernstein_rate((-200, -0.2), 0.0))
errs = np.array([table[k][math.inf] for k in range(40, 61)])
print("observed rate over k = 40..60:", math.exp(-np.polyfit(range(40, 61), np.log(errs), 1)[0]))
