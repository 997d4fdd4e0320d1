"""Pareto-based approximation of ``Y_t`` for small dispersion ``t``.

Reading the limit backwards, ``Y_t`` is close in law to ``U^{-1/t}`` with
``U ~ Pareto(ell)``, whose CDF is ``min(1, y^{t ell})``.  No ``theta0`` enters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .families import EdmModel, sample_log
from .limits import DEFAULT_U_GRID, spawn_streams
from .special import reg_lower_incomplete_gamma

MC_SAMPLES = 100_000


def approx_log_cdf(ell, t, log_y):
    """``log P(Y <= y)`` under the approximation, from ``log y``."""
    _check(ell, t)
    return np.minimum(0.0, t * ell * np.asarray(log_y, float))


def approx_cdf(ell, t, y):
    """``min(1, y^{t ell})`` for ``y > 0``."""
    y = np.asarray(y, float)
    if np.any(y <= 0):
        raise ValueError("y must be positive")
    out = np.exp(approx_log_cdf(ell, t, np.log(y)))
    return float(out) if out.ndim == 0 else out


def approx_log_quantile(ell, t, p):
    """``log`` of :func:`approx_quantile`; finite even when the quantile underflows."""
    _check(ell, t)
    p = np.asarray(p, float)
    if np.any((p <= 0) | (p > 1)):
        raise ValueError("p must lie in (0, 1]")
    out = np.log(p) / (t * ell)
    return float(out) if out.ndim == 0 else out


def approx_quantile(ell, t, p):
    """Inverse of :func:`approx_cdf`: ``p^{1/(t ell)}``."""
    out = np.exp(approx_log_quantile(ell, t, p))
    return float(out) if out.ndim == 0 else out


def approx_sample_log(ell, t, n, rng):
    """``log`` of ``U^{-1/t}`` draws, ``U ~ Pareto(ell)``."""
    _check(ell, t)
    # log U = -log(V) / ell with V uniform on (0, 1]
    log_u = -np.log(1.0 - rng.random(n)) / ell
    return -log_u / t


def approx_sampler(ell, t, n, rng):
    return np.exp(approx_sample_log(ell, t, n, rng))


def _check(ell, t):
    if not (ell > 0 and t > 0):
        raise ValueError("ell and t must be positive")


def gamma_log_y_cdf(t, theta0, log_y):
    """Exact ``P(Y <= y)`` for the gamma member with shape ``t``, rate ``1 + theta0``.

    Below ``x = e^{-30}`` the leading term ``x^t / Gamma(1 + t)`` is used so
    that ``y`` far below the float range still gets its (non-negligible)
    probability when ``t`` is tiny.
    """
    out = []
    log_rate = math.log1p(theta0)
    for ly in np.ravel(np.asarray(log_y, float)):
        lx = ly + log_rate
        if lx < -30.0:
            x = math.exp(lx)
            out.append(math.exp(t * lx - math.lgamma(1.0 + t)) * (1.0 - t * x / (1.0 + t)))
        else:
            out.append(reg_lower_incomplete_gamma(t, math.exp(lx)))
    return np.array(out)


@dataclass(frozen=True)
class ApproxReport:
    family: str
    t: float
    theta0: float
    ell: float
    sup_cdf_error: float
    log_grid: tuple
    exact: tuple
    approx: tuple
    method: str
    n: int = 0
    seed: object = None

    @property
    def grid(self):
        return tuple(math.exp(v) for v in self.log_grid)


def report_log_grid(t, u_grid=DEFAULT_U_GRID):
    """``log y`` for ``y = u^{-1/t}`` on the u-grid, kept to ``y <= 2``, plus ``y = 1, 2``."""
    logs = {-math.log(u) / t for u in u_grid}
    logs |= {0.0, math.log(2.0)}
    return tuple(sorted(v for v in logs if v <= math.log(2.0)))


def approx_error(family, theta0, t, n=MC_SAMPLES, *, seed=0, u_grid=DEFAULT_U_GRID):
    """Sup over the report grid of ``|P(Y_t <= y) - min(1, y^{t ell})|``.

    The gamma family uses its exact incomplete-gamma CDF; the others an
    empirical CDF of ``n`` draws.
    """
    ell = family.ell.ell
    log_grid = np.array(report_log_grid(t, u_grid))
    approx = np.exp(approx_log_cdf(ell, t, log_grid))
    if family.name == "gamma":
        exact = gamma_log_y_cdf(family.scale * t, theta0, log_grid)
        method, n_used = "exact-cdf", 0
    else:
        rng = spawn_streams(seed, 1)[0]
        logs = np.sort(sample_log(EdmModel(family, theta0, t), n, rng))
        exact = np.searchsorted(logs, log_grid, side="right") / n
        method, n_used = "monte-carlo", n
    err = float(np.max(np.abs(exact - approx)))
    return ApproxReport(
        family.name, float(t), float(theta0), ell, err,
        tuple(float(v) for v in log_grid), tuple(float(v) for v in exact),
        tuple(float(v) for v in approx), method, n_used, seed if n_used else None,
    )
