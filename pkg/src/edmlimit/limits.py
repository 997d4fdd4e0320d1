"""Small-dispersion limit of ``Y_t^{-t}`` and its diagnostics.

If ``G(x) ~ -ell log x`` as ``x -> 0`` then for ``Y_t ~ EDM(theta0, t)``

    (L(theta0 + u^{1/t}) / L(theta0))^t  ->  1 for u < 1,  u^{-ell} for u > 1,

so ``U_t = Y_t^{-t}`` converges in law to a Pareto variable with
``P(U <= u) = 1 - u^{-ell}`` on ``u >= 1``.  ``u^{1/t}`` is far outside the
float range for small ``t``, so everything here works with ``log(theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quad import quad, quad_log
from .families import BesselCdfTable, EdmModel, sample_log
from .special import log_bessel_i

DEFAULT_U_GRID = tuple(2.0 ** (j / 4) for j in range(-8, 17))
KS_T_GRID = (0.5, 0.2, 0.1, 0.05, 0.02)
# log density below this is reported as an underflowed zero
LOG_UNDERFLOW = -745.0


@dataclass(frozen=True)
class ParetoLaw:
    """Pareto law on ``[1, inf)`` with tail index ``ell``."""

    ell: float

    def __post_init__(self):
        if not self.ell > 0:
            raise ValueError("ell must be positive")

    def cdf(self, u):
        return pareto_cdf(self, u)

    def sample(self, n, rng):
        return (1.0 - rng.random(n)) ** (-1.0 / self.ell)


def pareto_cdf(law, u):
    """``0`` below 1, ``1 - u^{-ell}`` above."""
    u = np.asarray(u, float)
    with np.errstate(divide="ignore"):
        out = np.where(u < 1.0, 0.0, -np.expm1(-law.ell * np.log(np.maximum(u, 1.0))))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LimitCurve:
    """``values[i][j]`` is the transform at ``t_grid[i]``, ``u_grid[j]``."""

    family: str
    theta0: float
    ell: float
    u_grid: tuple
    t_grid: tuple
    values: tuple
    target: tuple
    extrapolated: tuple

    def rows(self):
        for i, t in enumerate(self.t_grid):
            for j, u in enumerate(self.u_grid):
                yield t, u, self.values[i][j], self.target[j], self.extrapolated[i][j]


def _check_grid(grid, name):
    grid = tuple(float(v) for v in grid)
    if not grid or any(not (v > 0 and math.isfinite(v)) for v in grid):
        raise ValueError(f"{name} must be a non-empty list of positive numbers")
    return grid


def lt_limit_curve(family, theta0, u_grid=DEFAULT_U_GRID, t_grid=(0.1, 0.01, 0.001)):
    """``(L(theta0 + u^{1/t}) / L(theta0))^t`` on a ``(t, u)`` grid.

    Cells whose ``k`` value came from the log-asymptote continuation are
    flagged in ``extrapolated``.
    """
    u_grid = _check_grid(u_grid, "u_grid")
    t_grid = _check_grid(t_grid, "t_grid")
    if not theta0 >= 0:
        raise ValueError("theta0 must be non-negative")
    ell = family.ell.ell
    log_theta0 = math.log(theta0) if theta0 > 0 else -math.inf
    k0 = family.k(theta0)
    values, flags = [], []
    for t in t_grid:
        row, frow = [], []
        for u in u_grid:
            log_theta = float(np.logaddexp(log_theta0, math.log(u) / t))
            k_val, flag = family.k_log(log_theta)
            row.append(math.exp(t * (k_val - k0)))
            frow.append(bool(flag))
        values.append(tuple(row))
        flags.append(tuple(frow))
    target = tuple(min(1.0, u ** -ell) for u in u_grid)
    return LimitCurve(family.name, float(theta0), ell, u_grid, t_grid, tuple(values), target, tuple(flags))


def transform_sample(sample, t):
    """``y -> y^{-t}``, computed as ``exp(-t log y)``."""
    y = np.asarray(sample, float)
    if np.any(y <= 0):
        raise ValueError("sample values must be positive (the law has no atom at 0)")
    return np.exp(-t * np.log(y))


def transform_log_sample(log_sample, t):
    """``y^{-t}`` from ``log y``; use this when ``y`` underflows."""
    return np.exp(-t * np.asarray(log_sample, float))


@dataclass(frozen=True)
class KsReport:
    t: float
    n: int
    ks: float
    seed: object
    d_plus: float = math.nan
    d_minus: float = math.nan


def ks_against_pareto(sample_transformed, law, *, t=math.nan, seed=None):
    """One-sample Kolmogorov-Smirnov distance to the exact Pareto CDF."""
    u = np.sort(np.asarray(sample_transformed, float))
    n = u.size
    if n == 0:
        raise ValueError("empty sample")
    cdf = pareto_cdf(law, u)
    i = np.arange(1, n + 1)
    d_plus = float(np.max(i / n - cdf))
    d_minus = float(np.max(cdf - (i - 1) / n))
    return KsReport(float(t), n, max(d_plus, d_minus), seed, d_plus, d_minus)


def spawn_streams(seed, count):
    """Independent generators, one per task index."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def ks_convergence(family, theta0, t_grid=KS_T_GRID, n=100_000, seed=0):
    """KS distance of ``Y_t^{-t}`` to Pareto(ell) for each ``t``.

    Stream ``i`` of ``SeedSequence(seed)`` drives ``t_grid[i]``, so results
    do not depend on evaluation order.
    """
    t_grid = _check_grid(t_grid, "t_grid")
    law = ParetoLaw(family.ell.ell)
    reports = []
    for t, rng in zip(t_grid, spawn_streams(seed, len(t_grid))):
        logs = sample_log(EdmModel(family, theta0, t), n, rng)
        reports.append(ks_against_pareto(transform_log_sample(logs, t), law, t=t, seed=seed))
    return reports


# ---------------------------------------------------------------------------
# Density of U = Y^{-t} for the Bessel family
# ---------------------------------------------------------------------------

def log_density_u(t, u, ell=1.0):
    """log density of ``U = Y^{-t}`` when ``Y`` has the Bessel law ``mu_{t ell}``.

    With ``y = u^{-1/t}`` the change of variables gives
    ``ell * u^{-1} * e^{-y} I_{t ell}(y)``.
    """
    u = np.asarray(u, float)
    if np.any(u <= 0):
        raise ValueError("u must be positive")
    log_u = np.log(u)
    return math.log(ell) - log_u + log_bessel_i(t * ell, log_x=-log_u / t, scaled=True)


def density_u(t, u, ell=1.0, *, with_flag=False):
    """Density of ``U``; values whose log falls below the float range are 0.

    With ``with_flag=True`` also returns a boolean array marking them.
    """
    lg = np.asarray(log_density_u(t, u, ell))
    flag = lg < LOG_UNDERFLOW
    out = np.where(flag, 0.0, np.exp(np.maximum(lg, LOG_UNDERFLOW)))
    if out.ndim == 0:
        out, flag = float(out), bool(flag)
    return (out, flag) if with_flag else out


def log_density_u_printed(t, u, ell=1.0):
    """``log(ell t^2 u^{2t+1} e^{-1/u^t} I_{t ell}(1/u^t))``.

    An alternative closed form for the same density.  It does not integrate
    to one and is only reported next to :func:`log_density_u` for comparison.
    """
    u = np.asarray(u, float)
    log_u = np.log(u)
    return (
        math.log(ell)
        + 2.0 * math.log(t)
        + (2.0 * t + 1.0) * log_u
        + log_bessel_i(t * ell, log_x=-t * log_u, scaled=True)
    )


def density_u_printed(t, u, ell=1.0):
    out = np.exp(log_density_u_printed(t, u, ell))
    return float(out) if np.ndim(out) == 0 else out


def _u_breakpoints(t):
    # the mass of U piles up within a few multiples of t (in log u) of u = 1
    return tuple(math.exp(sign * m * t) for m in (1.0, 5.0, 25.0) for sign in (-1.0, 1.0))


def density_u_mass(t, ell=1.0, upper=math.inf):
    """``int_0^upper`` of :func:`density_u` by quadrature."""
    return quad_log(lambda u: density_u(t, u, ell), 0.0, upper, points=_u_breakpoints(t), limit=1000)


def cdf_u(t, u, ell=1.0, *, method="table"):
    """``P(U <= u)``.

    ``method="table"`` uses ``1 - P(Y < u^{-1/t})`` from the tabulated Bessel
    CDF, ``method="quadrature"`` integrates :func:`density_u`.
    """
    if method == "quadrature":
        return density_u_mass(t, ell, upper=u)
    if method != "table":
        raise ValueError("method must be 'table' or 'quadrature'")
    table = BesselCdfTable(t * ell)
    log_y = -np.log(np.asarray(u, float)) / t
    out = 1.0 - table.cdf_log(log_y)
    return float(out[0]) if np.ndim(u) == 0 else out


def sup_distance_to_pareto(t, ell=1.0, u_max=20.0, points=400):
    """``sup |P(U <= u) - (1 - u^{-ell})|`` over a geometric grid on ``[1, u_max]``."""
    u = np.geomspace(1.0, u_max, points)
    table = BesselCdfTable(t * ell)
    exact = 1.0 - table.cdf_log(-np.log(u) / t)
    return float(np.max(np.abs(exact - pareto_cdf(ParetoLaw(ell), u))))


# ---------------------------------------------------------------------------
# Logarithmic integral asymptote
# ---------------------------------------------------------------------------

def eas_value(eta, theta):
    """``(theta / log theta) int_0^eta e^{-theta x} log x dx``; tends to -1.

    Computed after ``v = theta x`` as
    ``(int_0^{theta eta} e^{-v} log v dv - log(theta) (1 - e^{-theta eta})) / log theta``.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    if not theta > 1:
        raise ValueError("theta must exceed 1")
    upper = theta * eta
    # e^{-v} is below the double range past 745
    cut = min(upper, 745.0)
    f = lambda v: math.exp(-v) * math.log(v)
    inner = quad(f, 0.0, min(cut, 1.0), where="v near 0")
    if cut > 1.0:
        inner += quad(f, 1.0, cut, where="v above 1")
    log_theta = math.log(theta)
    return (inner + log_theta * math.expm1(-upper)) / log_theta


__all__ = [
    "DEFAULT_U_GRID",
    "KS_T_GRID",
    "KsReport",
    "LimitCurve",
    "ParetoLaw",
    "cdf_u",
    "density_u",
    "density_u_mass",
    "density_u_printed",
    "eas_value",
    "ks_against_pareto",
    "ks_convergence",
    "log_density_u",
    "log_density_u_printed",
    "lt_limit_curve",
    "pareto_cdf",
    "spawn_streams",
    "sup_distance_to_pareto",
    "transform_log_sample",
    "transform_sample",
]
