"""Exponential dispersion models of infinitely divisible laws on (0, inf)
and the Pareto limit of ``Y_t^{-t}`` as the dispersion ``t`` goes to 0."""

__version__ = "0.1.0"

from .approximation import approx_cdf, approx_error, approx_log_quantile, approx_quantile, approx_sampler
from .errors import (
    DensityUnavailableError,
    NumericalError,
    QuadratureError,
    SamplerUnavailableError,
    SeriesError,
    TailNotLogRegularError,
    TruncationError,
)
from .families import (
    EdmModel,
    Family,
    bessel_rw_family,
    edm_cdf,
    edm_density,
    edm_laplace,
    gamma_family,
    get_family,
    harmonic_poisson_family,
    sample,
    sample_log,
    user_family,
)
from .levy import (
    AtomRule,
    CumulantFunction,
    LevyMeasure,
    SlowLogIndex,
    TailFunction,
    cumulant_from_tail,
    cumulant_truncated,
    estimate_ell,
    log_asymptote,
    tail_from_measure,
    tilt,
)
from .limits import (
    ParetoLaw,
    density_u,
    eas_value,
    ks_against_pareto,
    ks_convergence,
    lt_limit_curve,
    pareto_cdf,
    transform_sample,
)
from .special import (
    SeriesEvalPolicy,
    bessel_i,
    confluent_half,
    exp_integral_e1,
    harmonic_number,
    log_bessel_i,
    reg_lower_incomplete_gamma,
)
