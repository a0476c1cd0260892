"""
How well polynomials approximate phi(z) = (exp(z) - 1) / z
=========================================================

Polynomial approximation of phi on [-4 rho, 0] controls Krylov methods for
exponential integrators. The table compares the bound for phi with the
classical bound for exp and with the measured error of the Chebyshev
interpolant. Errors far below double precision are measured in mpmath.
"""

import math

from bivkrylov.bounds import exp_bound_reference, phi_bound
from bivkrylov.experiments import phi_interpolation_error

rho = 10
print("  k   phi bound   exp bound   measured")
for k in (7, 10, 15, 20, 30, 40):
    print(f"{k:3d}   {phi_bound(k, rho):.2e}    {exp_bound_reference(k, rho):.2e}    "
          f"{phi_interpolation_error(k, rho):.2e}")

# for large rho the values underflow; the logarithms do not
print("log10 phi_bound(4000, 1000):", phi_bound(4000, 1000, log=True) / math.log(10))
