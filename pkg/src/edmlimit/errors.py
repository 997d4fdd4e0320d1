"""Exception types raised by the numerical routines."""


class NumericalError(RuntimeError):
    """Base class for numerical failures (quadrature, series, tabulation)."""


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to reach its tolerance.

    The best estimate obtained so far is kept in ``partial`` and the
    error estimate in ``abserr`` so callers can decide whether to use it.
    """

    def __init__(self, message, partial=float("nan"), abserr=float("nan")):
        super().__init__(message)
        self.partial = partial
        self.abserr = abserr


class SeriesError(NumericalError):
    """A series hit its term cap before meeting the stopping rule."""


class TruncationError(NumericalError):
    """An atom-rule truncation bound would have to exceed its cap."""


class TailNotLogRegularError(ValueError):
    """The Levy tail does not behave like ``-ell * log(x)`` near zero."""


class DensityUnavailableError(NotImplementedError):
    """The family has no closed-form density; use Monte Carlo instead."""


class SamplerUnavailableError(NotImplementedError):
    """The family has no sampler."""
