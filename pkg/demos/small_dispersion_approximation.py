"""Approximate P(Y_t <= y) by min(1, y^t) and see what that costs.

Run with ``python3 demos/small_dispersion_approximation.py``.
"""

import math

from edmlimit import approx_error
from edmlimit.approximation import approx_quantile
from edmlimit.families import bessel_rw_family, gamma_family

gamma = gamma_family()
print("gamma member, exact incomplete-gamma CDF vs the Pareto-based formula")
for theta0 in (0.0, 1.0):
    for t in (0.5, 0.1, 0.05, 0.01):
        rep = approx_error(gamma, theta0, t)
        print(f"  theta0 = {theta0:g}  t = {t:<5g} sup |error| = {rep.sup_cdf_error:.4f}")

# Where does the error live?  Print the grid for t = 0.1.
rep = approx_error(gamma, 0.0, 0.1)
print("\n  log y      exact     approx")
for ly, ex, ap in zip(rep.log_grid, rep.exact, rep.approx):
    print(f"  {ly + 0.0:8.2f}  {ex:.5f}  {ap:.5f}")

# The approximate median of Y_t is 2^{-1/t}, tiny for small t.
for t in (0.5, 0.1, 0.05):
    print(f"approximate median at t = {t:g}: {approx_quantile(1.0, t, 0.5):.3e}")
print(f"(at t = 0.001 only its log is representable: {math.log(0.5) / 0.001:.1f})")

# A family without a usable closed CDF goes through Monte Carlo.
rep = approx_error(bessel_rw_family(), 0.0, 0.05, n=50_000, seed=1)
print(f"\nBessel member, t = 0.05, {rep.n} draws: sup |error| = {rep.sup_cdf_error:.4f}")
