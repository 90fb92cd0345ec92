"""First-passage and escape problems for the Feller (square-root) diffusion.

Work in dimensionless units ``dX = -(X - theta) dt + sqrt(2X) dW``; build a
:class:`DimensionlessModel` directly from ``theta`` or from physical
parameters via :func:`to_dimensionless`.
"""
__version__ = "0.1.0"

from .specfun import (
    DomainError,
    PoleError,
    SpecialFnResult,
    kummer_f,
    kummer_u,
    log_kummer_f,
    log_kummer_u,
    gamma_upper,
    exp_integral_e1,
)
from .process import (
    FellerParams,
    DimensionlessModel,
    OriginRegime,
    BoundaryClass,
    to_dimensionless,
    classify_origin,
    transition_pdf,
    stationary_pdf,
    pdf_laplace_x,
)
from .laplace import (
    Side,
    ThresholdSpec,
    IntervalSpec,
    SingularConfigurationError,
    LimitRegimeWarning,
    fpt_lt,
    fpt_lt_below,
    fpt_lt_above,
    fpt_lt_origin,
    escape_lt,
)
from .invert import StehfestConfig, InversionError, stehfest_weights, invert_at, invert_curve
from .passage import (
    CurveMethod,
    PassageCurve,
    MeanTimeResult,
    ApproximationWarning,
    fpt_prob,
    fpt_prob_origin,
    fpt_prob_origin_asymptotic,
    fpt_prob_large_threshold,
    fpt_curve,
    escape_prob,
    escape_curve,
    fpt_density,
    mfpt,
    mfpt_origin,
    mean_escape_time,
    exponential_asymptote,
)
from .mc import (
    SimScheme,
    McEstimate,
    CensoringError,
    sample_transition,
    simulate_fpt,
    simulate_escape,
    estimate_mean,
    empirical_cdf,
)
