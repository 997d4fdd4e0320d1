"""Levy measures of pure-jump subordinators on (0, inf).

A measure ``nu`` is given by a density, by a rule producing atoms, or by its
tail ``G(x) = nu((x, inf))`` directly.  From it we obtain the Laplace exponent

    k(theta) = -int_0^inf (1 - exp(-theta x)) nu(dx),    theta >= 0,

either straight from ``nu`` or from the tail through integration by parts,

    k_eps(theta) = (exp(-theta eps) - 1) G(eps) - theta int_eps^inf exp(-theta x) G(x) dx,

whose ``eps -> 0`` limit is ``-theta int_0^inf exp(-theta x) G(x) dx``.  The
slow-log index ``ell`` is the constant in ``G(x) ~ -ell log x`` as ``x -> 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ._quad import quad_log
from .errors import QuadratureError, TailNotLogRegularError, TruncationError

# atoms summed one by one; beyond this the closed-form tail takes over
DIRECT_ATOM_LIMIT = 4_000_000
ATOM_CHUNK = 1_000_000
# jumps of an atomic tail integrated exactly; quadrature only below them
STEP_TABLE_ATOMS = 1_000_000

# x = 2**-j for j in this window feeds the ell fit
ELL_FIT_J = tuple(range(10, 31))
UNBOUNDED_MARGIN = 1.0
INTEGRABILITY_BOUND = 1e12
# k(1e12) must be below this for "k -> -inf" to count as observed
K_DIVERGENCE_THRESHOLD = -5.0


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AtomRule:
    """Atoms ``mass(n)`` at ``location(n)``, n = 1, 2, ..., ``n_max``.

    Both callables take an integer numpy array.  Locations must be strictly
    decreasing in ``n``.  ``n_max=None`` means infinitely many atoms; such a
    rule is only usable together with a closed-form tail.
    """

    location: Callable[[np.ndarray], np.ndarray]
    mass: Callable[[np.ndarray], np.ndarray]
    n_max: Optional[int] = None

    @classmethod
    def from_pairs(cls, pairs):
        """Finite atom list from ``(location, mass)`` pairs."""
        arr = np.array(sorted(pairs, key=lambda p: -p[0]), dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("atoms must be (location, mass) pairs")
        if np.any(arr[:, 0] <= 0) or np.any(arr[:, 1] <= 0):
            raise ValueError("atom locations and masses must be positive")
        locs, masses = arr[:, 0].copy(), arr[:, 1].copy()
        return cls(lambda n: locs[n - 1], lambda n: masses[n - 1], len(locs))

    def chunks(self, limit=None):
        """Yield ``(n, location, mass)`` arrays chunk by chunk."""
        stop = self.n_max if self.n_max is not None else math.inf
        if limit is not None:
            stop = min(stop, limit)
        start = 1
        while start <= stop:
            end = int(min(stop, start + ATOM_CHUNK - 1))
            n = np.arange(start, end + 1, dtype=np.int64)
            yield n, np.asarray(self.location(n), float), np.asarray(self.mass(n), float)
            start = end + 1

    def count_above(self, x, cap=DIRECT_ATOM_LIMIT):
        """Number of atoms located strictly above ``x`` (``None`` past ``cap``)."""
        count = 0
        for n, loc, _ in self.chunks(limit=cap):
            above = int(np.count_nonzero(loc > x))
            count += above
            if above < len(n):
                return count
        if self.n_max is not None and self.n_max <= cap:
            return count
        return None


@dataclass(frozen=True)
class StepTable:
    """Jumps of a step tail: ``G = level[i]`` on ``(loc[i+1], loc[i]]``.

    ``loc`` is strictly decreasing, ``G = 0`` above ``loc[0]``.  When
    ``complete`` the table lists every atom, so ``G = level[-1]`` below
    ``loc[-1]``.
    """

    loc: np.ndarray
    level: np.ndarray
    complete: bool

    @classmethod
    def from_rule(cls, rule, limit=STEP_TABLE_ATOMS):
        locs, masses = [], []
        for _, loc, mass in rule.chunks(limit=limit):
            locs.append(loc)
            masses.append(mass)
        loc = np.concatenate(locs)
        complete = rule.n_max is not None and rule.n_max <= limit
        return cls(loc, np.cumsum(np.concatenate(masses)), complete)


@dataclass(frozen=True)
class TailFunction:
    """``G(x) = nu((x, inf))`` with an optional analytically known index."""

    G: Callable[[float], float]
    known_index: Optional[float] = None
    breakpoints: tuple = ()
    steps: Optional[StepTable] = field(default=None, repr=False, compare=False)

    def __call__(self, x):
        return self.G(x)

    def check(self, points=(1e-8, 1e-4, 1e-2, 0.1, 1.0, 10.0, 100.0), far=1e6, far_tol=1e-3):
        """Non-negative and non-increasing at ``points``, small at ``far``."""
        vals = [self.G(p) for p in sorted(points)]
        if any(v < 0 for v in vals):
            raise ValueError("tail takes negative values")
        if any(b > a * (1 + 1e-12) + 1e-300 for a, b in zip(vals, vals[1:])):
            raise ValueError("tail is not non-increasing")
        if self.G(far) > far_tol:
            raise ValueError(f"tail does not vanish at infinity: G({far:g}) = {self.G(far):g}")
        return True


@dataclass(frozen=True)
class CumulantFunction:
    """Laplace exponent ``k(theta) = log L(theta)`` with its evaluation route.

    ``k_log`` evaluates ``k`` from ``log(theta)`` and returns the pair
    ``(value, extrapolated)``; it is what large-argument callers use.
    """

    k: Callable[[float], float]
    method: str
    k_log: Optional[Callable[[float], tuple]] = None

    def __call__(self, theta):
        if theta == 0:
            return 0.0
        return self.k(theta)

    def at_log(self, log_theta):
        if self.k_log is not None:
            return self.k_log(log_theta)
        if log_theta > 709.0:
            raise OverflowError("theta too large for the linear-scale cumulant")
        return self.k(math.exp(log_theta)), False

    def check(self, grid_exponents=range(0, 31), slack=1e-12):
        """k(0) = 0, non-increasing, concave in log theta on 2**j, and -> -inf."""
        if self(0.0) != 0.0:
            raise ValueError("k(0) must be 0")
        vals = np.array([self.at_log(j * math.log(2.0))[0] for j in grid_exponents])
        if np.any(np.diff(vals) > slack):
            raise ValueError("k is not non-increasing")
        if np.any(np.diff(vals, 2) > slack * max(1.0, np.abs(vals).max())):
            raise ValueError("k is not concave in log(theta) on the dyadic grid")
        if self.at_log(12 * math.log(10.0))[0] > K_DIVERGENCE_THRESHOLD:
            raise ValueError("k(1e12) is not below the divergence threshold")
        return True


@dataclass(frozen=True)
class SlowLogIndex:
    """Estimated (or analytic) ``ell`` with its fit window and RMS residual."""

    ell: float
    fit_window: Optional[tuple]
    residual: float
    ratios: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if not self.ell > 0:
            raise ValueError("ell must be positive")
        if self.residual < 0:
            raise ValueError("residual must be non-negative")


@dataclass(frozen=True)
class LevyMeasure:
    """Positive measure on (0, inf): a density, an atom rule, or a tail.

    ``tail`` may accompany a density or an atom rule when ``G`` is known in
    closed form; it is then used instead of quadrature or summation.
    ``breakpoints`` lists points where the density or tail is not smooth.
    """

    density: Optional[Callable[[float], float]] = None
    atoms: Optional[AtomRule] = None
    tail: Optional[Callable[[float], float]] = None
    support_hint: tuple = (0.0, math.inf)
    breakpoints: tuple = ()
    known_index: Optional[float] = None
    name: str = "levy"

    def __post_init__(self):
        given = sum(r is not None for r in (self.density, self.atoms))
        if given > 1:
            raise ValueError("give either a density or an atom rule, not both")
        if given == 0 and self.tail is None:
            raise ValueError("a Levy measure needs a density, atoms or a tail")
        if self.atoms is not None and self.atoms.n_max is None and self.tail is None:
            raise ValueError("an infinite atom rule needs a closed-form tail")

    @property
    def kind(self):
        if self.density is not None:
            return "density"
        if self.atoms is not None:
            return "atoms"
        return "tail"

    @classmethod
    def from_density(cls, density, *, validate=True, **kwargs):
        nu = cls(density=density, **kwargs)
        if validate:
            validate_measure(nu)
        return nu

    @classmethod
    def from_atoms(cls, atoms, *, validate=True, **kwargs):
        if not isinstance(atoms, AtomRule):
            atoms = AtomRule.from_pairs(atoms)
        nu = cls(atoms=atoms, **kwargs)
        if validate:
            validate_measure(nu)
        return nu

    @classmethod
    def from_tail(cls, tail, *, validate=True, **kwargs):
        nu = cls(tail=tail, **kwargs)
        if validate:
            validate_measure(nu)
        return nu

    def G(self, x):
        return tail_from_measure(self, x)

    def tail_function(self):
        steps = None if self.atoms is None else StepTable.from_rule(self.atoms)
        return TailFunction(self.G, known_index=self.known_index, breakpoints=self.breakpoints, steps=steps)

    def scaled(self, c):
        """The measure ``c * nu``; its slow-log index is ``c * ell``."""
        if not c > 0:
            raise ValueError("scale must be positive")
        if c == 1:
            return self
        return replace(
            self,
            density=None if self.density is None else _scaled_fn(self.density, c),
            atoms=None if self.atoms is None else replace(self.atoms, mass=_scaled_fn(self.atoms.mass, c)),
            tail=None if self.tail is None else _scaled_fn(self.tail, c),
            known_index=None if self.known_index is None else c * self.known_index,
            name=f"{c:g}*{self.name}",
        )


def _scaled_fn(f, c):
    return lambda x: c * f(x)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def small_jump_moment(nu):
    """``int min(1, x) nu(dx)``."""
    if nu.kind == "density":
        hi = nu.support_hint[1]
        near = quad_log(lambda x: x * nu.density(x), 0.0, min(1.0, hi), points=nu.breakpoints, epsrel=1e-8)
        return near + (tail_from_measure(nu, 1.0) if hi > 1.0 else 0.0)
    if nu.kind == "atoms":
        total = 0.0
        last_loc = None
        for _, loc, mass in nu.atoms.chunks(limit=DIRECT_ATOM_LIMIT):
            total += float(np.sum(np.minimum(1.0, loc) * mass))
            last_loc = float(loc[-1])
        if nu.atoms.n_max is not None and nu.atoms.n_max <= DIRECT_ATOM_LIMIT:
            return total
        # remaining atoms sit in (0, x_c]: sum of loc*mass = int_0^x_c G - x_c G(x_c)
        x_c = last_loc
        rest = quad_log(nu.tail, 0.0, x_c, epsrel=1e-8) - x_c * nu.tail(x_c)
        return total + rest
    # tail only: int min(1,x) nu(dx) = int_0^1 G(x) dx
    return quad_log(nu.tail, 0.0, 1.0, epsrel=1e-8)


def validate_measure(nu, *, integrability_bound=INTEGRABILITY_BOUND, margin=UNBOUNDED_MARGIN):
    """Check ``int min(1,x) nu(dx) < bound`` and that ``G`` blows up at 0."""
    try:
        moment = small_jump_moment(nu)
    except QuadratureError as exc:
        raise ValueError(f"int min(1,x) nu(dx) could not be evaluated (not integrable?): {exc}") from exc
    if not (math.isfinite(moment) and moment < integrability_bound):
        raise ValueError(f"int min(1,x) nu(dx) = {moment!r} exceeds {integrability_bound:g}")
    gap = tail_from_measure(nu, 2.0**-30) - tail_from_measure(nu, 2.0**-10)
    if gap < margin:
        raise ValueError(
            f"Levy measure looks bounded: G(2^-30) - G(2^-10) = {gap:.4g} < {margin:g}"
        )
    return moment


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def _atom_sum(rule, x, weight):
    """``sum weight(loc, mass)`` over atoms with location > x (direct range only).

    Returns ``(total, complete)`` where ``complete`` says whether every atom
    above ``x`` was reached before :data:`DIRECT_ATOM_LIMIT`.
    """
    total = 0.0
    for n, loc, mass in rule.chunks(limit=DIRECT_ATOM_LIMIT):
        keep = loc > x
        total += math.fsum(weight(loc[keep], mass[keep]))
        if not keep[-1]:
            return total, True
    complete = rule.n_max is not None and rule.n_max <= DIRECT_ATOM_LIMIT
    return total, complete


def _direct_cut(rule):
    """Location of the first atom not summed directly."""
    return float(rule.location(np.array([DIRECT_ATOM_LIMIT + 1]))[0])


def tail_from_measure(nu, x):
    """``G(x) = nu((x, inf))``.

    Atoms strictly above ``x`` are summed; densities are integrated on
    ``(x, inf)``; a closed-form tail is used whenever one is attached.
    """
    if not x > 0:
        raise ValueError("x must be positive")
    if math.isinf(x):
        return 0.0
    if nu.tail is not None:
        return float(nu.tail(x))
    if nu.kind == "density":
        hi = nu.support_hint[1]
        if x >= hi:
            return 0.0
        try:
            return quad_log(nu.density, x, hi, points=nu.breakpoints)
        except QuadratureError as exc:
            raise QuadratureError(f"tail integral on ({x:g}, inf): {exc}", exc.partial, exc.abserr) from exc
    total, complete = _atom_sum(nu.atoms, x, lambda loc, m: m)
    if not complete:
        raise TruncationError(f"more than {DIRECT_ATOM_LIMIT} atoms above x={x:g}")
    return total


def tilt(nu, theta0):
    """Exponentially tilted measure ``exp(-theta0 x) nu(dx)``."""
    if not theta0 > 0:
        raise ValueError("theta0 must be positive")
    name = f"tilt({nu.name},{theta0:g})"
    if nu.kind == "density":
        rho = nu.density
        return replace(nu, density=lambda x: math.exp(-theta0 * x) * rho(x), tail=None, name=name)
    if nu.kind == "atoms":
        rule = nu.atoms
        new_rule = AtomRule(
            rule.location,
            lambda n: np.exp(-theta0 * np.asarray(rule.location(n), float)) * rule.mass(n),
            rule.n_max,
        )
        if rule.n_max is not None and rule.n_max <= DIRECT_ATOM_LIMIT:
            return replace(nu, atoms=new_rule, tail=None, name=name)
        return replace(nu, atoms=new_rule, tail=_tilted_atom_tail(new_rule, nu.tail, theta0), name=name)
    G = nu.tail
    hi = nu.support_hint[1]

    def tilted_tail(x):
        # e^{-theta0 x} G(x) - theta0 int_x^inf e^{-theta0 y} G(y) dy
        if x >= hi:
            return 0.0
        rest = quad_log(lambda y: math.exp(-theta0 * y) * G(y), x, hi, points=nu.breakpoints)
        return math.exp(-theta0 * x) * G(x) - theta0 * rest

    return replace(nu, tail=tilted_tail, name=name)


def _tilted_atom_tail(rule, base_tail, theta0):
    x_c = _direct_cut(rule)

    def tail(x):
        if x >= x_c:
            total, _ = _atom_sum(rule, x, lambda loc, m: m)
            return total
        # atoms in (x, x_c] via integration by parts against the untilted tail
        upper, _ = _atom_sum(rule, x_c, lambda loc, m: m)
        integral = quad_log(lambda y: math.exp(-theta0 * y) * base_tail(y), x, x_c, epsrel=1e-12)
        inner = (
            math.exp(-theta0 * x) * base_tail(x)
            - math.exp(-theta0 * x_c) * base_tail(x_c)
            - theta0 * integral
        )
        return upper + inner

    return tail


def _as_tail(G):
    if isinstance(G, TailFunction):
        return G
    if isinstance(G, LevyMeasure):
        return G.tail_function()
    return TailFunction(G)


def _exp_weighted_tail_integral(G, theta, lower):
    """``theta * int_lower^inf exp(-theta x) G(x) dx`` with ``v = theta x``.

    On the listed jumps of a step tail the integral is exact; quadrature
    covers the rest (for atoms only the region below the last listed jump,
    where the steps are too dense for QUADPACK's error estimate, so there it
    is accepted up to 1e-4 relative of a piece that is itself tiny).
    """
    tf = _as_tail(G)
    parts = []
    quad_hi = math.inf
    dense = False
    if tf.steps is not None:
        loc, level = tf.steps.loc, tf.steps.level
        # intervals (loc[i+1], loc[i]] clipped to x > lower
        hi = loc[:-1]
        lo = np.maximum(loc[1:], lower)
        keep = hi > lo
        if np.any(keep):
            h, l, c = hi[keep], lo[keep], level[:-1][keep]
            parts.append(math.fsum(c * np.exp(-theta * l) * -np.expm1(-theta * (h - l))))
        bottom = loc[-1]
        if lower < bottom:
            if tf.steps.complete:
                parts.append(level[-1] * math.exp(-theta * lower) * -math.expm1(-theta * (bottom - lower)))
            else:
                quad_hi, dense = bottom, True
        if quad_hi == math.inf:
            return math.fsum(parts)
    f = lambda v: math.exp(-v) * tf(v / theta)
    a, b = theta * lower, theta * quad_hi
    pts = [theta * p for p in tf.breakpoints if lower < p < quad_hi]
    cuts = sorted({a, b, *([1.0] if a < 1.0 < b else [])})
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        try:
            parts.append(quad_log(
                f, lo, hi,
                points=[p for p in pts if lo < p < hi],
                limit=2000,
                accept_rel=1e-4 if dense else 1e-8,
            ))
        except QuadratureError as exc:
            raise QuadratureError(
                f"exp-weighted tail integral diverges or fails on x in "
                f"({lo / theta:g}, {hi / theta:g}]: {exc}",
                exc.partial,
                exc.abserr,
            ) from exc
    return math.fsum(parts)


def cumulant_from_tail(G, theta):
    """``k(theta) = -theta int_0^inf exp(-theta x) G(x) dx``; exactly 0 at 0."""
    if theta < 0:
        raise ValueError("theta must be non-negative")
    if theta == 0:
        return 0.0
    return -_exp_weighted_tail_integral(G, theta, 0.0)


def cumulant_truncated(nu, theta, epsilon):
    """``k_eps(theta) = -int_{(eps, inf)} (1 - exp(-theta x)) nu(dx)``.

    Evaluated through ``(exp(-theta eps) - 1) G(eps) - theta int_eps^inf
    exp(-theta x) G(x) dx``.  For atoms the Stieltjes integral is exact and
    reduces to the finite sum over atoms above ``eps``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if theta < 0:
        raise ValueError("theta must be non-negative")
    if theta == 0:
        return 0.0
    if nu.kind == "atoms":
        rule = nu.atoms
        weight = lambda loc, m: -m * -np.expm1(-theta * loc)
        total, complete = _atom_sum(rule, epsilon, weight)
        if complete:
            return total
        if nu.tail is None:
            raise TruncationError(f"more than {DIRECT_ATOM_LIMIT} atoms above eps={epsilon:g}")
        x_c = _direct_cut(rule)
        head, _ = _atom_sum(rule, x_c, weight)
        G = nu.tail
        h = lambda y: -math.expm1(-theta * y)
        integral = quad_log(lambda y: math.exp(-theta * y) * G(y), epsilon, x_c, epsrel=1e-12)
        inner = h(epsilon) * G(epsilon) - h(x_c) * G(x_c) + theta * integral
        return head - inner
    G_eps = tail_from_measure(nu, epsilon)
    return math.expm1(-theta * epsilon) * G_eps - _exp_weighted_tail_integral(nu, theta, epsilon)


def cumulant_direct(nu, theta):
    """``-int (1 - exp(-theta x)) nu(dx)`` integrated against ``nu`` itself.

    An independent route to ``k`` for densities and finite atom lists; tail
    only measures fall back to :func:`cumulant_from_tail`.
    """
    if theta < 0:
        raise ValueError("theta must be non-negative")
    if theta == 0:
        return 0.0
    if nu.kind == "density":
        f = lambda x: -math.expm1(-theta * x) * nu.density(x)
        return -quad_log(f, 0.0, nu.support_hint[1], points=(1.0 / theta, *nu.breakpoints), limit=2000)
    if nu.kind == "atoms":
        return cumulant_truncated(nu, theta, 1e-300)
    return cumulant_from_tail(nu.tail_function(), theta)


def estimate_ell(G, known_index=None):
    """Least-squares constant fit of ``G(2^-j) / (j log 2)`` over j = 10..30."""
    tf = _as_tail(G)
    known = known_index if known_index is not None else tf.known_index
    j = np.array(ELL_FIT_J, dtype=float)
    ratios = np.array([tf(2.0 ** -jj) for jj in ELL_FIT_J]) / (j * math.log(2.0))
    if np.any(~np.isfinite(ratios)) or np.any(ratios <= 0):
        raise TailNotLogRegularError("tail not log-regular: non-positive G(x)/(-log x) ratios")
    ell = float(ratios.mean())
    residual = float(np.sqrt(np.mean((ratios - ell) ** 2)))
    if residual > 0.5 * ell:
        raise TailNotLogRegularError(
            f"tail not log-regular: ratios vary too much (residual {residual:.3g}, estimate {ell:.3g})"
        )
    if known is not None and abs(known - ell) > 3.0 * residual:
        raise TailNotLogRegularError(
            f"known index {known:g} is not within 3 residuals of the estimate {ell:.4g} (residual {residual:.3g})"
        )
    window = (2.0 ** -ELL_FIT_J[-1], 2.0 ** -ELL_FIT_J[0])
    return SlowLogIndex(ell, window, residual, tuple(ratios))


def log_asymptote(k, theta):
    """``k(theta) / log(theta)``; tends to ``-ell`` for log-regular tails."""
    if not theta > 1:
        raise ValueError("theta must exceed 1")
    log_theta = math.log(theta)
    if isinstance(k, CumulantFunction):
        value = k.at_log(log_theta)[0]
    else:
        value = k(theta)
    return value / log_theta
