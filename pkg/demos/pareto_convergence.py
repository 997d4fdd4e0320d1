"""Sample Y_t, map it to U = Y_t^{-t} and measure how close U is to Pareto(1).

Run with ``python3 demos/pareto_convergence.py``.
"""

import numpy as np

from edmlimit import EdmModel, ParetoLaw, ks_convergence, sample_log
from edmlimit.families import bessel_rw_family, gamma_family, harmonic_poisson_family
from edmlimit.limits import cdf_u, sup_distance_to_pareto, transform_log_sample

T = (0.5, 0.2, 0.1, 0.05, 0.02)
N = 100_000

# Draws are kept as log y: for t = 0.02 most gamma draws are below 1e-300.
gamma = gamma_family()
logs = sample_log(EdmModel(gamma, 0.0, 0.02), 5, np.random.default_rng(0))
print("five log-draws of the gamma member with t = 0.02:", np.round(logs, 1))

print(f"\nKolmogorov-Smirnov distance of U to Pareto(1), n = {N}:")
print("family      " + "".join(f"t={t:<8g}" for t in T))
for fam in (gamma, harmonic_poisson_family(), bessel_rw_family()):
    ks = [r.ks for r in ks_convergence(fam, 0.0, T, n=N, seed=2024)]
    print(f"{fam.name:10s}  " + "".join(f"{v:<10.4f}" for v in ks))

# For the Bessel family the law of U is available without sampling.
print("\nBessel family, exact P(U <= u) against 1 - 1/u:")
law = ParetoLaw(1.0)
for t in (1.0, 0.5, 0.1, 0.02):
    row = "  ".join(f"{cdf_u(t, u):.4f}/{law.cdf(u):.4f}" for u in (1.5, 2.0, 4.0))
    print(f"  t = {t:<5g} {row}   sup gap on [1, 20]: {sup_distance_to_pareto(t):.4f}")

u = transform_log_sample(logs, 0.02)
print("\nthe five gamma draws above, as U:", np.round(u, 3))
