"""Watch (L(theta0 + u^{1/t}) / L(theta0))^t settle on min(1, 1/u).

Run with ``python3 demos/laplace_limit.py``.
"""

import numpy as np

from edmlimit import lt_limit_curve
from edmlimit.families import bessel_rw_family, gamma_family, harmonic_poisson_family

U = (0.5, 1.0, 1.5, 2.0, 4.0)
T = (0.5, 0.1, 0.01, 0.001)

# Three jump measures whose tails all grow like -log x near zero.
families = [gamma_family(), harmonic_poisson_family(), bessel_rw_family()]

for fam in families:
    for theta0 in (0.0, 1.0):
        curve = lt_limit_curve(fam, theta0, U, T)
        print(f"\n{fam.name}, theta0 = {theta0:g}   (* = k continued along its log asymptote)")
        print("      t  " + "".join(f"u={u:<9g}" for u in U))
        for t, row, flags in zip(curve.t_grid, curve.values, curve.extrapolated):
            cells = "".join(f"{v:.6f}{'*' if f else ' '}  " for v, f in zip(row, flags))
            print(f"{t:>7g}  {cells}")
        print(" target  " + "".join(f"{v:.6f}   " for v in curve.target))

# theta0 drops out in the limit: compare the last rows directly.
print("\nlargest |theta0=0 - theta0=1| gap at t = 0.001:")
for fam in families:
    a = lt_limit_curve(fam, 0.0, U, [1e-3]).values[0]
    b = lt_limit_curve(fam, 1.0, U, [1e-3]).values[0]
    print(f"  {fam.name:9s} {np.max(np.abs(np.subtract(a, b))):.2e}")
