"""Special functions needed by the three worked families.

Everything here is evaluated by series, continued fractions or fixed-node
quadrature written out explicitly; scipy is used only by the test-suite as an
independent cross-check.  The Bessel function is computed on the log scale
first, because the densities built from it are evaluated at arguments such
as ``u ** (-1 / t)`` with ``t`` close to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SeriesError

EULER_GAMMA = 0.57721566490153286061
LOG_2PI = math.log(2.0 * math.pi)

# above this argument I_v is evaluated through its Hankel expansion
BESSEL_SERIES_MAX_X = 30.0
# confluent_half switches series -> Chebyshev integral -> large-x expansion
CONFLUENT_SERIES_MAX_X = 20.0
CONFLUENT_INTEGRAL_MAX_X = 1000.0

log_gamma = math.lgamma


@dataclass(frozen=True)
class SeriesEvalPolicy:
    """Stopping rule shared by the series evaluators.

    A series stops once the newest term is below ``rel_tol`` times the
    running sum.  Reaching ``max_terms`` first is an error.
    """

    max_terms: int = 5000
    rel_tol: float = 1e-16

    def __post_init__(self):
        if self.max_terms < 50:
            raise ValueError("max_terms must be >= 50")
        if not 0.0 < self.rel_tol <= 1e-12:
            raise ValueError("rel_tol must lie in (0, 1e-12]")


DEFAULT_POLICY = SeriesEvalPolicy()


# ---------------------------------------------------------------------------
# Modified Bessel function of the first kind
# ---------------------------------------------------------------------------

def _log_bessel_series(order, x, log_x, policy):
    """log I_order(x) from the power series, vectorised over ``x``.

    Terms are positive so the sum is accumulated relative to the leading
    term ``(x/2)**order / Gamma(order+1)``; no cancellation occurs.
    Converged entries are dropped from the working set as the loop goes.
    """
    q = 0.25 * x * x
    total = np.ones_like(x)
    # log of a common factor taken out of term and total to avoid overflow
    offset = np.zeros_like(x)
    idx = np.flatnonzero(q > 0.0)
    term = np.ones(idx.size)
    n = 0
    while idx.size:
        if n >= policy.max_terms:
            raise SeriesError(
                f"Bessel series for order {order} did not converge in "
                f"{policy.max_terms} terms (max x = {x.max():g})"
            )
        term = term * q[idx] / ((n + 1.0) * (n + 1.0 + order))
        total[idx] += term
        n += 1
        big = total[idx] > 1e250
        if np.any(big):
            scale = total[idx[big]]
            term[big] /= scale
            total[idx[big]] = 1.0
            offset[idx[big]] += np.log(scale)
        keep = term > policy.rel_tol * total[idx]
        idx, term = idx[keep], term[keep]
    lead = order * (log_x - math.log(2.0)) - math.lgamma(order + 1.0)
    return lead + offset + np.log(total)


def _log_bessel_hankel(order, x, log_x, policy):
    """log(e^{-x} I_order(x)) for large x from the Hankel expansion.

    The exponentially small companion term is dropped; for ``x > 30`` it
    is below 1e-26 relative.
    """
    mu = 4.0 * order * order
    total = np.ones_like(x)
    idx = np.arange(x.size)
    term = np.ones(x.size)
    k = 1
    while idx.size:
        if k >= policy.max_terms:
            raise SeriesError("Hankel expansion did not converge")
        new = term * (-(mu - (2.0 * k - 1.0) ** 2)) / (8.0 * k * x[idx])
        # asymptotic series: stop before the terms start growing
        ok = np.abs(new) < np.abs(term)
        idx, term = idx[ok], new[ok]
        total[idx] += term
        keep = np.abs(term) > policy.rel_tol * np.abs(total[idx])
        idx, term = idx[keep], term[keep]
        k += 1
    return -0.5 * (LOG_2PI + log_x) + np.log(total)


def log_bessel_i(order, x=None, *, log_x=None, scaled=False, policy=DEFAULT_POLICY):
    """Natural log of the modified Bessel function ``I_order(x)``.

    Parameters
    ----------
    order : float
        Real order, ``order >= 0``.
    x : float or array_like
        Argument, ``x >= 0``.  May be omitted when ``log_x`` is given, which
        allows arguments far below the float range.
    log_x : float or array_like, optional
        ``log(x)``.  Used for the leading power ``(x/2)**order`` so that
        tiny arguments keep full accuracy.
    scaled : bool
        Return ``log(e^{-x} I_order(x))`` instead; this avoids the loss of
        digits from subtracting ``x`` afterwards when ``x`` is huge.

    Returns
    -------
    float or ndarray
        ``-inf`` at ``x = 0`` for positive order.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    scalar = np.ndim(x if x is not None else log_x) == 0
    if log_x is not None:
        log_x = np.atleast_1d(np.asarray(log_x, dtype=float))
        # x = inf past log_x = 709; only the log is used there
        with np.errstate(over="ignore"):
            x = np.exp(log_x)
    else:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x < 0):
            raise ValueError("x must be non-negative")
        with np.errstate(divide="ignore"):
            log_x = np.log(x)
    out = np.empty_like(x)

    # the Hankel expansion is only reliable when order**2 is small next to x
    big = (x > BESSEL_SERIES_MAX_X) & (order * order < 0.25 * x)
    small = ~big
    if np.any(small):
        xs, ls = x[small], log_x[small]
        zero = np.isneginf(ls)
        vals = np.empty_like(xs)
        if np.any(~zero):
            vals[~zero] = _log_bessel_series(order, xs[~zero], ls[~zero], policy)
            if scaled:
                vals[~zero] -= xs[~zero]
        vals[zero] = 0.0 if order == 0 else -np.inf
        out[small] = vals
    if np.any(big):
        hank = _log_bessel_hankel(order, x[big], log_x[big], policy)
        out[big] = hank if scaled else hank + x[big]
    return float(out[0]) if scalar else out


def bessel_i(order, x, *, policy=DEFAULT_POLICY):
    """Modified Bessel function ``I_order(x)`` on the linear scale.

    Raises ``OverflowError`` when the value exceeds the float range; use
    :func:`log_bessel_i` there.
    """
    lv = log_bessel_i(order, x, policy=policy)
    if np.any(np.asarray(lv) > 709.0):
        raise OverflowError("I_v(x) overflows; request log_bessel_i instead")
    return np.exp(lv) if np.ndim(lv) else math.exp(lv)


# ---------------------------------------------------------------------------
# Confluent hypergeometric 1F1(1/2; 1; -2x)
# ---------------------------------------------------------------------------

def _confluent_series(x, policy):
    # Kummer: 1F1(a;b;-z) = e^{-z} 1F1(b-a;b;z); with a=1/2, b=1 the
    # transformed series has positive terms (a)_n z^n / (n!)^2.
    z = 2.0 * x
    term = 1.0
    total = 1.0
    for n in range(policy.max_terms):
        term *= (0.5 + n) * z / ((n + 1.0) * (n + 1.0))
        total += term
        if term <= policy.rel_tol * total:
            return math.exp(-z) * total
    raise SeriesError(f"confluent series did not converge at x={x}")


def _confluent_integral(x, rel_tol=1e-14, max_nodes=1 << 20):
    # (1/pi) int_0^1 e^{-2xt} / sqrt(t(1-t)) dt.  Gauss-Chebyshev nodes
    # t_k = sin^2((2k-1) pi / 4N) absorb both endpoint singularities;
    # 2 x t_k is written with sin^2 to avoid 1 - cos cancellation.
    prev = None
    n = 64
    while n <= max_nodes:
        k = np.arange(1, n + 1)
        t = np.sin((2 * k - 1) * np.pi / (4.0 * n)) ** 2
        val = float(np.mean(np.exp(-2.0 * x * t)))
        if prev is not None and abs(val - prev) <= rel_tol * abs(val):
            return val
        prev = val
        n *= 2
    raise SeriesError(f"Chebyshev quadrature for confluent_half did not settle at x={x}")


def _confluent_large(x, policy):
    # e^{-x} I_0(x) ~ (2 pi x)^{-1/2} sum_k ((2k-1)!!)^2 / (k! (8x)^k)
    term = 1.0
    total = 1.0
    for k in range(1, policy.max_terms):
        new = term * (2.0 * k - 1.0) ** 2 / (8.0 * k * x)
        if new >= term:
            break
        term = new
        total += term
        if term <= policy.rel_tol * total:
            break
    return total / math.sqrt(2.0 * math.pi * x)


def confluent_half(x, *, method=None, policy=DEFAULT_POLICY):
    """``1F1(1/2; 1; -2x)`` for ``x >= 0``.

    ``method`` forces one evaluation route (``"series"``, ``"integral"`` or
    ``"asymptotic"``); by default the series is used up to x = 20, the
    Chebyshev integral up to x = 1000 and the large-argument expansion beyond.
    """
    if x < 0:
        raise ValueError("confluent_half is defined here for x >= 0")
    if method is None:
        if x <= CONFLUENT_SERIES_MAX_X:
            method = "series"
        elif x <= CONFLUENT_INTEGRAL_MAX_X:
            method = "integral"
        else:
            method = "asymptotic"
    if method == "series":
        return _confluent_series(float(x), policy)
    if method == "integral":
        return _confluent_integral(float(x))
    if method == "asymptotic":
        return _confluent_large(float(x), policy)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Incomplete gamma, exponential integral, harmonic numbers
# ---------------------------------------------------------------------------

def _lentz(a_of, b_of, b0, tiny=1e-300, rel_tol=1e-16, max_terms=5000):
    """Modified Lentz evaluation of b0 + a1/(b1 + a2/(b2 + ...))."""
    f = b0 if b0 != 0.0 else tiny
    c = f
    d = 0.0
    for i in range(1, max_terms):
        a, b = a_of(i), b_of(i)
        d = b + a * d
        d = tiny if d == 0.0 else d
        c = b + a / c
        c = tiny if c == 0.0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < rel_tol:
            return f
    raise SeriesError("continued fraction did not converge")


def reg_lower_incomplete_gamma(s, x, *, policy=DEFAULT_POLICY):
    """Regularized lower incomplete gamma ``P(s, x) = gamma(s, x) / Gamma(s)``.

    Series below ``x = s + 1``, Legendre continued fraction above.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    log_pref = s * math.log(x) - x - math.lgamma(s)
    if x < s + 1.0:
        term = 1.0 / s
        total = term
        for n in range(1, policy.max_terms):
            term *= x / (s + n)
            total += term
            if term < policy.rel_tol * total:
                return min(1.0, math.exp(log_pref + math.log(total)))
        raise SeriesError(f"incomplete gamma series did not converge (s={s}, x={x})")
    # Q(s,x) = e^{-x} x^s / Gamma(s) * 1/(x+1-s- 1(1-s)/(x+3-s- ...))
    cf = _lentz(lambda i: -i * (i - s), lambda i: x + 2.0 * i + 1.0 - s, x + 1.0 - s)
    q = math.exp(log_pref) / cf
    return max(0.0, 1.0 - q)


def exp_integral_e1(x, *, policy=DEFAULT_POLICY):
    """Exponential integral ``E1(x) = int_x^inf e^{-y}/y dy`` for ``x > 0``."""
    if not x > 0:
        raise ValueError("E1 is defined here for x > 0")
    if x <= 1.0:
        # E1(x) = -gamma - log x - sum_{n>=1} (-x)^n / (n n!)
        term = 1.0
        total = 0.0
        for n in range(1, policy.max_terms):
            term *= -x / n
            contrib = term / n
            total += contrib
            if abs(contrib) < policy.rel_tol * abs(total):
                return -EULER_GAMMA - math.log(x) - total
        raise SeriesError("E1 series did not converge")
    if x > 745.0:
        return 0.0
    # e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    cf = _lentz(lambda i: -float(i * i), lambda i: x + 2.0 * i + 1.0, x + 1.0)
    return math.exp(-x) / cf


def harmonic_number(m):
    """``H_m = sum_{n=1}^m 1/n`` for integer ``m >= 0`` (float result)."""
    m = int(m)
    if m < 0:
        raise ValueError("m must be non-negative")
    if m <= 64:
        return math.fsum(1.0 / n for n in range(1, m + 1))
    inv = 1.0 / m
    inv2 = inv * inv
    return (
        math.log(m) + EULER_GAMMA + 0.5 * inv
        - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0))
    )
