"""Thin wrapper around QUADPACK with the package's tolerance conventions."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

from .errors import QuadratureError

REL_TOL = 1e-10
ABS_TOL = 1e-14
# accepted when QUADPACK reports roundoff trouble but its own estimate is tight
FALLBACK_REL_TOL = 1e-8
MAX_SUBINTERVALS = 500


def quad(f, a, b, *, points=None, epsrel=REL_TOL, epsabs=ABS_TOL, limit=MAX_SUBINTERVALS,
         accept_rel=FALLBACK_REL_TOL, where=""):
    """Adaptive quadrature of ``f`` over ``[a, b]`` (either end may be infinite).

    Raises :class:`QuadratureError` with the partial value when the
    integrator stops short of ``epsrel`` and its own error estimate is also
    above ``accept_rel`` relative.
    """
    if a == b:
        return 0.0
    kwargs = dict(epsrel=epsrel, epsabs=epsabs, limit=limit, full_output=1)
    if points is not None and math.isfinite(a) and math.isfinite(b):
        pts = sorted(p for p in points if a < p < b)
        if pts:
            kwargs["points"] = pts
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        try:
            res = integrate.quad(f, a, b, **kwargs)
        except ArithmeticError as exc:
            raise QuadratureError(f"integrand failed on {where or (a, b)}: {exc}") from exc
    val, err = res[0], res[1]
    ier = 0 if len(res) == 3 else 1
    if not math.isfinite(val):
        raise QuadratureError(f"non-finite integral on {where or (a, b)}", val, err)
    if ier and err > max(epsabs, accept_rel * abs(val)):
        raise QuadratureError(
            f"quadrature on {where or (a, b)} missed tolerance: value={val!r}, abserr={err:.3g}",
            val,
            err,
        )
    return val


def quad_log(f, a, b, *, points=(), **kwargs):
    """Integrate ``f(x) dx`` over ``[a, b]``, ``a >= 0``, using ``x = e^s``.

    The substitution turns ``1/x``-type behaviour near zero into something
    smooth and lets an infinite upper limit decay algebraically in ``s``.
    Integration is split at ``x = 1`` and at every entry of ``points``.
    """
    if a < 0:
        raise ValueError("quad_log needs a >= 0")
    lo = math.log(a) if a > 0 else -math.inf
    hi = math.log(b) if math.isfinite(b) else math.inf
    cuts = sorted({math.log(p) for p in (1.0, *points) if a < p < b})
    edges = [lo, *cuts, hi]

    def g(s):
        # outside the float range the integrand must already have decayed
        if s > 709.0 or s < -744.0:
            return 0.0
        x = math.exp(s)
        return f(x) * x

    where = kwargs.pop("where", "")
    return math.fsum(
        quad(g, s0, s1, where=where or f"x in ({math.exp(s0):g}, {math.exp(s1):g})", **kwargs)
        for s0, s1 in zip(edges[:-1], edges[1:])
    )


def gauss_legendre(n):
    """Nodes and weights on [-1, 1]."""
    return np.polynomial.legendre.leggauss(n)
