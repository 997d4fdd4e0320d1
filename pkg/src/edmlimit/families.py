"""Exponential dispersion models generated by type-1 infinitely divisible laws.

For a base law ``mu`` with Laplace transform ``L(theta) = exp(k(theta))`` the
member ``EDM(theta0, t)`` has Laplace transform ``(L(theta0 + s) / L(theta0))**t``
and, when ``mu_t`` has a density ``f_t``, density ``exp(-theta0 x) f_t(x) / L(theta0)**t``.

Three worked families are provided:

* gamma: ``nu(dx) = e^{-x} dx / x``, ``L(theta) = 1 / (1 + theta)``;
* harmonic Poisson: ``nu = sum_n delta_{1/n}``, the law of ``sum_n X_n / n``
  with independent ``X_n ~ Poisson(1/n)``;
* Bessel random walk: ``L(theta) = theta + 1 - sqrt(theta^2 + 2 theta)``,
  ``nu(dx) = 1F1(1/2; 1; -2x) dx / x`` and
  ``f_t(x) = (t / x) e^{-x} I_t(x)``.

Any other Levy measure can be wrapped with :func:`user_family`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import zeta

from ._quad import gauss_legendre
from .errors import (
    DensityUnavailableError,
    NumericalError,
    SamplerUnavailableError,
    TruncationError,
)
from .levy import (
    AtomRule,
    CumulantFunction,
    LevyMeasure,
    SlowLogIndex,
    cumulant_direct,
    estimate_ell,
)
from .special import (
    confluent_half,
    exp_integral_e1,
    harmonic_number,
    log_bessel_i,
    reg_lower_incomplete_gamma,
)

# harmonic family: atoms summed directly before the Hurwitz-zeta tail
HARMONIC_N = 1_000_000
HARMONIC_N_CAP = 100_000_000
HARMONIC_THETA_MAX = 1e6
# quadrature-backed cumulants switch to the log asymptote above this
QUAD_THETA_MAX = 1e10

BESSEL_TABLE_CELLS = 2048
# the table spans these lower / upper tail probabilities (wider than 1e-8)
BESSEL_TABLE_LOWER_TAIL = 1e-12
BESSEL_TABLE_UPPER_TAIL = 1e-9
BESSEL_INVERSION_TOL = 1e-10


@dataclass(frozen=True)
class Family:
    """A base law ``mu`` together with everything derived from its Levy measure.

    ``scale`` implements the convolution-power rescaling: the family built
    from ``c * nu`` has ``k_c = c k`` and its ``mu_t`` equals ``mu_{c t}`` of
    the unscaled family, so densities and samplers are called with ``c t``.
    """

    name: str
    levy: LevyMeasure
    cumulant: CumulantFunction
    ell: SlowLogIndex
    scale: float = 1.0
    log_density_fn: Optional[Callable] = None
    cdf_fn: Optional[Callable] = None
    sample_log_fn: Optional[Callable] = None
    k_prime: Optional[Callable[[float], float]] = None
    theta_domain: tuple = (0.0, math.inf)
    jorgensen: tuple = (0.0, math.inf)

    @property
    def tail(self):
        return self.levy.tail_function()

    def k(self, theta):
        return self.cumulant(theta)

    def k_log(self, log_theta):
        """``(k(theta), extrapolated)`` from ``log(theta)``."""
        return self.cumulant.at_log(log_theta)

    def laplace(self, theta):
        return math.exp(self.k(theta))

    def scaled(self, c):
        """Family generated by ``c * nu`` (slow-log index ``c * ell``)."""
        if not c > 0:
            raise ValueError("scale must be positive")
        if c == 1:
            return self
        base = self.cumulant
        k_log = None
        if base.k_log is not None:
            def k_log(s, _f=base.k_log):
                v, flag = _f(s)
                return c * v, flag
        ell = SlowLogIndex(c * self.ell.ell, self.ell.fit_window, c * self.ell.residual, ())
        return replace(
            self,
            name=f"{self.name}*{c:g}",
            levy=self.levy.scaled(c),
            cumulant=CumulantFunction(lambda th, _k=base.k: c * _k(th), base.method, k_log),
            ell=ell,
            scale=self.scale * c,
            k_prime=None if self.k_prime is None else (lambda th, _d=self.k_prime: c * _d(th)),
        )


@dataclass(frozen=True)
class EdmModel:
    """One member ``EDM(theta0, t)`` of a family."""

    family: Family
    theta0: float
    t: float

    def __post_init__(self):
        if not self.theta0 >= 0:
            raise ValueError("theta0 must lie in D = [0, inf)")
        if not (self.t > 0 and math.isfinite(self.t)):
            raise ValueError("t must lie in the Jorgensen set (0, inf)")

    @property
    def t_eff(self):
        return self.family.scale * self.t


def _extrapolating(k, theta_max, ell):
    """``k_log`` that evaluates ``k`` up to ``theta_max`` and continues with
    slope ``-ell`` in ``log(theta)`` beyond, flagging those values."""
    log_max = math.log(theta_max)
    k_max = []

    def k_log(s):
        if s <= log_max:
            return k(math.exp(s)), False
        if not k_max:
            k_max.append(k(theta_max))
        return k_max[0] - ell * (s - log_max), True

    return k_log


# ---------------------------------------------------------------------------
# Gamma family
# ---------------------------------------------------------------------------

def _gamma_k_log(s):
    return -float(np.logaddexp(0.0, s)), False


def _gamma_log_density(t, theta0, x):
    x = np.asarray(x, float)
    rate = 1.0 + theta0
    with np.errstate(divide="ignore"):
        return t * math.log(rate) + (t - 1.0) * np.log(x) - rate * x - math.lgamma(t)


def _gamma_cdf(t, theta0, x):
    return np.array([reg_lower_incomplete_gamma(t, (1.0 + theta0) * v) for v in np.ravel(x)]).reshape(np.shape(x))


def _gamma_sample_log(t, theta0, n, rng):
    # Gamma(t) = Gamma(t + 1) * U^{1/t}, kept on the log scale
    g = rng.standard_gamma(t + 1.0, size=n)
    u = 1.0 - rng.random(n)
    return np.log(g) + np.log(u) / t - math.log1p(theta0)


def gamma_family():
    """``mu(dx) = e^{-x} dx``; ``k(theta) = -log(1 + theta)``, ``G = E1``."""
    levy = LevyMeasure(
        density=lambda x: math.exp(-x) / x,
        tail=exp_integral_e1,
        known_index=1.0,
        name="gamma",
    )
    cumulant = CumulantFunction(lambda th: -math.log1p(th), "closed-form", _gamma_k_log)
    return Family(
        name="gamma",
        levy=levy,
        cumulant=cumulant,
        ell=SlowLogIndex(1.0, None, 0.0),
        log_density_fn=_gamma_log_density,
        cdf_fn=_gamma_cdf,
        sample_log_fn=_gamma_sample_log,
        k_prime=lambda th: -1.0 / (1.0 + th),
    )


# ---------------------------------------------------------------------------
# Harmonic Poisson family
# ---------------------------------------------------------------------------

def harmonic_tail(x):
    """``nu((x, inf)) = H_m`` with ``m`` the number of ``n`` with ``1/n > x``."""
    if x >= 1.0:
        return 0.0
    m = math.ceil(1.0 / x) - 1
    return harmonic_number(m)


def _hurwitz_tail(theta, N, rel_tol=1e-17):
    """``sum_{n > N} (1/n)(1 - e^{-theta/n})`` by expanding the exponential."""
    total = 0.0
    coef = 1.0
    for j in range(1, 60):
        coef *= theta / j
        term = coef * float(zeta(j + 1.0, N + 1.0))
        total += term if j % 2 else -term
        if term <= rel_tol * abs(total):
            return total
    raise NumericalError(f"Hurwitz tail expansion did not converge (theta={theta}, N={N})")


def harmonic_cumulant(theta, n_terms=None):
    """``k(theta) = -sum_{n>=1} (1/n)(1 - e^{-theta/n})``.

    The first ``N = max(10^6, 50 theta)`` terms are summed directly and the
    rest through Hurwitz zeta values; ``N`` above the cap raises.
    """
    if theta < 0:
        raise ValueError("theta must be non-negative")
    if theta == 0:
        return 0.0
    N = n_terms or max(HARMONIC_N, math.ceil(50.0 * theta))
    if N > HARMONIC_N_CAP:
        raise TruncationError(f"harmonic series would need {N} terms (cap {HARMONIC_N_CAP})")
    total = 0.0
    for start in range(1, N + 1, HARMONIC_N):
        n = np.arange(start, min(N, start + HARMONIC_N - 1) + 1, dtype=float)
        total += math.fsum(-np.expm1(-theta / n) / n)
    return -(total + _hurwitz_tail(theta, N))


def _harmonic_sample_log(t, theta0, n, rng, N=HARMONIC_N):
    """Log-draws of ``sum_n X_n / n`` with ``X_n ~ Poisson(t e^{-theta0/n} / n)``.

    Atoms ``n <= N`` form a compound Poisson sum (total rate
    ``t sum_n e^{-theta0/n}/n``, jump ``1/n`` picked with weight
    ``e^{-theta0/n}/n``).  The atoms beyond ``N`` are replaced by the
    continuous Levy density ``t/x`` on ``(0, 1/(N + 1/2)]``, i.e. a scaled
    generalized Dickman variable ``D = W (1 + D')`` with ``W = U^{1/t}``;
    this keeps every draw strictly positive.  The remainder ignores the tilt,
    an error of order ``theta0 / N``.
    """
    idx = np.arange(1, N + 1, dtype=float)
    w = np.exp(-theta0 / idx) / idx
    cw = np.cumsum(w)
    counts = rng.poisson(t * cw[-1], size=n)
    picks = np.searchsorted(cw, rng.random(int(counts.sum())) * cw[-1], side="right")
    owner = np.repeat(np.arange(n), counts)
    main = np.bincount(owner, weights=1.0 / (np.minimum(picks, N - 1) + 1.0), minlength=n)

    log_w1 = np.log(1.0 - rng.random(n)) / t
    rest = np.zeros(n)
    prod = np.ones(n)
    live = np.arange(n)
    while live.size:
        prod[live] *= (1.0 - rng.random(live.size)) ** (1.0 / t)
        rest[live] += prod[live]
        live = live[prod[live] > 1e-17 * (1.0 + rest[live])]
    log_rem = -math.log(N + 0.5) + log_w1 + np.log1p(rest)
    with np.errstate(divide="ignore"):
        return np.where(main > 0, np.logaddexp(np.log(main), log_rem), log_rem)


def harmonic_poisson_family():
    """``nu = sum_{n>=1} delta_{1/n}``; ``G(x) = H_{#{n: 1/n > x}}``, ell = 1."""
    rule = AtomRule(lambda n: 1.0 / n, lambda n: 1.0 / n, None)
    levy = LevyMeasure(atoms=rule, tail=harmonic_tail, known_index=1.0, name="harmonic")
    k_log = _extrapolating(harmonic_cumulant, HARMONIC_THETA_MAX, 1.0)

    def k(th):
        if th > HARMONIC_THETA_MAX:
            return k_log(math.log(th))[0]
        return harmonic_cumulant(th)

    def k_prime(th):
        # -sum e^{-theta/n} / n^2 summed directly; tail bounded by 1/N
        n = np.arange(1, HARMONIC_N + 1, dtype=float)
        return -(math.fsum(np.exp(-th / n) / n**2) + float(zeta(2.0, HARMONIC_N + 1.0)))

    return Family(
        name="harmonic",
        levy=levy,
        cumulant=CumulantFunction(k, "series", k_log),
        ell=SlowLogIndex(1.0, None, 0.0),
        sample_log_fn=_harmonic_sample_log,
        k_prime=k_prime,
    )


# ---------------------------------------------------------------------------
# Bessel random-walk family
# ---------------------------------------------------------------------------

def bessel_cumulant(theta):
    """``log(theta + 1 - sqrt(theta^2 + 2 theta)) = -arccosh(1 + theta)``."""
    return -math.log1p(theta + math.sqrt(theta * (theta + 2.0)))


def _bessel_k_log(s):
    if s < 20.0:
        return bessel_cumulant(math.exp(s)), False
    w = math.exp(-s)
    return -(s + math.log(1.0 + w + math.sqrt(1.0 + 2.0 * w))), False


def _bessel_log_density(t, theta0, x):
    """log of ``e^{-theta0 x} (t/x) e^{-x} I_t(x) / L(theta0)^t``."""
    x = np.asarray(x, float)
    with np.errstate(divide="ignore"):
        lx = np.log(x)
    out = math.log(t) - lx + log_bessel_i(t, log_x=lx, scaled=True) - theta0 * x
    return out - t * bessel_cumulant(theta0)


class BesselCdfTable:
    """Tabulated CDF of ``EDM(theta0, t)`` for the Bessel family, in ``s = log x``.

    The density in ``s`` is ``g(s) = x p(x)``.  Cells of equal width in ``s``
    carry composite Gauss-Legendre masses; below the table the CDF is the
    power law ``A x^t``, and for ``theta0 = 0`` the upper tail is
    ``t sqrt(2 / (pi x))``.  Inversion starts from a monotone (PCHIP)
    interpolant and is finished by safeguarded Newton steps in the cell.
    """

    def __init__(self, t, theta0=0.0, cells=BESSEL_TABLE_CELLS):
        if not t > 0:
            raise ValueError("t must be positive")
        self.t = float(t)
        self.theta0 = float(theta0)
        self._kt = self.t * bessel_cumulant(self.theta0)
        # lower tail: F(x) ~ A x^t with A = 1 / (2^t Gamma(1+t) L(theta0)^t)
        self._log_a = -self.t * math.log(2.0) - math.lgamma(1.0 + self.t) - self._kt
        s_lo = (math.log(BESSEL_TABLE_LOWER_TAIL) - self._log_a) / self.t
        x_hi = 2.0 * self.t**2 / (math.pi * BESSEL_TABLE_UPPER_TAIL**2)
        if self.theta0 > 0:
            x_hi = min(x_hi, (40.0 - self._kt) / self.theta0)
        s_hi = math.log(x_hi)
        if s_hi <= s_lo:
            raise NumericalError("Bessel CDF table has an empty range")
        self.edges = np.linspace(s_lo, s_hi, cells + 1)
        width = self.edges[1] - self.edges[0]
        self._panels = max(1, math.ceil(width / 0.5))
        self._nodes, self._weights = gauss_legendre(16)

        masses = self._partial(self.edges[:-1], self.edges[1:])
        self.f_lo = math.exp(self._log_a + self.t * s_lo)
        self.upper_tail = self._upper_sf(s_hi) if self.theta0 == 0 else 0.0
        total = self.f_lo + masses.sum() + self.upper_tail
        if abs(total - 1.0) > 1e-8:
            raise NumericalError(f"Bessel CDF tabulation failed: total mass {total!r}")
        self.total = total
        self.cdf_nodes = (self.f_lo + np.concatenate([[0.0], np.cumsum(masses)])) / total
        # far-tail cells can carry mass below the float spacing near 1
        keep = np.concatenate([[True], np.diff(self.cdf_nodes) > 0])
        self._guess = PchipInterpolator(self.cdf_nodes[keep], self.edges[keep])

    def log_g(self, s):
        """log density of ``log Y``."""
        s = np.asarray(s, float)
        x = np.exp(s)
        return (
            math.log(self.t)
            + log_bessel_i(self.t, log_x=s, scaled=True)
            - self.theta0 * x
            - self._kt
        )

    def _upper_sf(self, s):
        return self.t * math.sqrt(2.0 / math.pi) * np.exp(-0.5 * np.asarray(s, float)) / self.total_guess()

    def total_guess(self):
        return getattr(self, "total", 1.0)

    def _partial(self, a, b):
        """``int_a^b g(s) ds`` elementwise (composite Gauss-Legendre)."""
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        h = (b - a) / self._panels
        out = np.zeros(np.broadcast(a, b).shape)
        for p in range(self._panels):
            lo = a + p * h
            mid = lo + 0.5 * h
            s = mid[..., None] + 0.5 * h[..., None] * self._nodes
            out += 0.5 * h * np.sum(self._weights * np.exp(self.log_g(s)), axis=-1)
        return out

    def cdf_log(self, s):
        """CDF at ``x = exp(s)``."""
        s = np.atleast_1d(np.asarray(s, float))
        out = np.empty_like(s)
        lo = s <= self.edges[0]
        hi = s >= self.edges[-1]
        mid = ~(lo | hi)
        out[lo] = np.exp(self._log_a + self.t * s[lo]) / self.total
        out[hi] = 1.0 - (self._upper_sf(s[hi]) if self.theta0 == 0 else 0.0)
        if np.any(mid):
            i = np.clip(np.searchsorted(self.edges, s[mid], side="right") - 1, 0, len(self.edges) - 2)
            out[mid] = self.cdf_nodes[i] + self._partial(self.edges[i], s[mid]) / self.total
        return out

    def cdf(self, x):
        x = np.asarray(x, float)
        with np.errstate(divide="ignore"):
            return self.cdf_log(np.log(x)).reshape(x.shape)

    def ppf_log(self, p):
        """``log`` of the quantile function, to 1e-10 in probability."""
        p = np.atleast_1d(np.asarray(p, float))
        out = np.empty_like(p)
        lo = p <= self.cdf_nodes[0]
        hi = p >= self.cdf_nodes[-1]
        out[lo] = (np.log(p[lo] * self.total) - self._log_a) / self.t
        if self.theta0 == 0:
            sf = np.maximum(1.0 - p[hi], 1e-300) * self.total
            out[hi] = 2.0 * np.log(self.t * math.sqrt(2.0 / math.pi) / sf)
        else:
            out[hi] = self.edges[-1]
        mid = np.flatnonzero(~(lo | hi))
        if mid.size:
            out[mid] = self._invert(p[mid])
        return out

    def _invert(self, p):
        i = np.clip(np.searchsorted(self.cdf_nodes, p, side="right") - 1, 0, len(self.edges) - 2)
        a, b = self.edges[i].copy(), self.edges[i + 1].copy()
        s = np.clip(self._guess(p), a, b)
        todo = np.arange(p.size)
        for _ in range(200):
            if not todo.size:
                return s
            ii = i[todo]
            f = self.cdf_nodes[ii] + self._partial(self.edges[ii], s[todo]) / self.total - p[todo]
            done = np.abs(f) <= BESSEL_INVERSION_TOL
            below = f < 0
            a[todo] = np.where(below, s[todo], a[todo])
            b[todo] = np.where(below, b[todo], s[todo])
            g = np.exp(self.log_g(s[todo])) / self.total
            with np.errstate(divide="ignore", invalid="ignore"):
                step = s[todo] - f / g
            bad = ~np.isfinite(step) | (step <= a[todo]) | (step >= b[todo])
            step = np.where(bad, 0.5 * (a[todo] + b[todo]), step)
            s[todo] = np.where(done, s[todo], step)
            todo = todo[~done]
        raise NumericalError("Bessel quantile inversion did not converge")

    def sample_log(self, n, rng):
        return self.ppf_log(1.0 - rng.random(n))


def _bessel_cdf(t, theta0, x):
    return BesselCdfTable(t, theta0).cdf(x)


def _bessel_sample_log(t, theta0, n, rng):
    return BesselCdfTable(t, theta0).sample_log(n, rng)


def bessel_rw_family():
    """``L(theta) = theta + 1 - sqrt(theta^2 + 2 theta)``, ``nu(dx) = 1F1(1/2;1;-2x) dx/x``."""
    levy = LevyMeasure(density=lambda x: confluent_half(x) / x, known_index=1.0, name="bessel")
    return Family(
        name="bessel",
        levy=levy,
        cumulant=CumulantFunction(bessel_cumulant, "closed-form", _bessel_k_log),
        ell=SlowLogIndex(1.0, None, 0.0),
        log_density_fn=_bessel_log_density,
        cdf_fn=_bessel_cdf,
        sample_log_fn=_bessel_sample_log,
        k_prime=lambda th: -1.0 / math.sqrt(th * (th + 2.0)),
    )


# ---------------------------------------------------------------------------
# User-supplied Levy measure
# ---------------------------------------------------------------------------

def user_family(levy, *, cumulant=None, name="user", theta_max=QUAD_THETA_MAX):
    """Family built from an arbitrary Levy measure.

    ``k`` is the supplied closed form or else ``-int (1 - e^{-theta x}) nu(dx)``
    by quadrature up to ``theta_max``, continued above it along the log
    asymptote with the estimated (or declared) index.  No density or sampler.
    """
    if levy.known_index is not None:
        ell = SlowLogIndex(levy.known_index, None, 0.0)
    else:
        ell = estimate_ell(levy)
    if cumulant is not None:
        cf = CumulantFunction(cumulant, "closed-form", None)
    else:
        k = lambda th: cumulant_direct(levy, th)
        cf = CumulantFunction(k, "quadrature", _extrapolating(k, theta_max, ell.ell))
    return Family(name=name, levy=levy, cumulant=cf, ell=ell)


BUILTIN_FAMILIES = {
    "gamma": gamma_family,
    "harmonic": harmonic_poisson_family,
    "bessel": bessel_rw_family,
}


def get_family(name):
    try:
        return BUILTIN_FAMILIES[name]()
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(BUILTIN_FAMILIES)}") from None


# ---------------------------------------------------------------------------
# EDM operations
# ---------------------------------------------------------------------------

def edm_log_laplace(model, s):
    """``t (k(theta0 + s) - k(theta0))`` and whether extrapolation was used."""
    if s < 0:
        raise ValueError("s must be non-negative")
    if s == 0:
        return 0.0, False
    fam = model.family
    th = model.theta0 + s
    k_s, flag = fam.k_log(math.log(th))
    k_0 = fam.k(model.theta0)
    return model.t * (k_s - k_0), flag


def edm_laplace(model, s):
    """``E exp(-s Y) = (L(theta0 + s) / L(theta0))^t`` for ``Y ~ EDM(theta0, t)``."""
    val, flag = edm_log_laplace(model, s)
    if flag:
        raise ValueError(
            f"theta0 + s = {model.theta0 + s:g} lies beyond the range where k is evaluated"
        )
    return math.exp(val)


def edm_log_density(model, x):
    fam = model.family
    if fam.log_density_fn is None:
        raise DensityUnavailableError(
            f"family {fam.name!r} has no closed-form density; use Monte Carlo (sample)"
        )
    x = np.asarray(x, float)
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    return fam.log_density_fn(model.t_eff, model.theta0, x)


def edm_density(model, x):
    """Density of ``EDM(theta0, t)`` (gamma and Bessel families)."""
    out = np.exp(edm_log_density(model, x))
    return float(out) if np.ndim(out) == 0 else out


def edm_cdf(model, x):
    fam = model.family
    if fam.cdf_fn is None:
        raise DensityUnavailableError(f"family {fam.name!r} has no CDF; use Monte Carlo")
    out = fam.cdf_fn(model.t_eff, model.theta0, np.asarray(x, float))
    return float(out) if np.ndim(out) == 0 else out


def sample_log(model, n, rng):
    """``log`` of ``n`` independent draws from ``EDM(theta0, t)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    fam = model.family
    if fam.sample_log_fn is None:
        raise SamplerUnavailableError(f"family {fam.name!r} has no sampler")
    return fam.sample_log_fn(model.t_eff, model.theta0, int(n), rng)


def sample(model, n, rng):
    """``n`` independent draws from ``EDM(theta0, t)``.

    For small ``t`` draws can fall below the float range; prefer
    :func:`sample_log` there.
    """
    return np.exp(sample_log(model, n, rng))
