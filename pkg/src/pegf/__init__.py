"""Past entropy generating functions for lifetime distributions."""

from .catalog import (
    Custom,
    Distribution,
    Exponential,
    GeneralizedPower,
    LeftExponential,
    Power,
    Uniform,
    cdf,
    closed_form_pegf,
    mean_inactivity,
    parse_spec,
    pdf,
    reversed_hazard,
    sample,
)
from .egf_core import (
    EgfCurve,
    QuadratureConfig,
    SOrder,
    affine_pegf,
    egf,
    past_entropy,
    past_entropy_via_rhr,
    pegf,
    pegf_curve,
    pegf_s_derivative_at_one,
    rhr_identity_residual,
)
from .errors import *  # noqa: F401,F403
from .inference import (
    EstimatorConfig,
    GofReport,
    ecdf,
    fit_power_mle,
    kde_density,
    pegf_estimate,
    power_gof_statistic,
    power_gof_test,
    reversed_hazard_estimate,
)
from .reconstruct import ReconstructionResult, RootSolveConfig, detect_constant_pegf, reconstruct_cdf, solve_lambda
from .samples import SampleData

__version__ = "0.1.0"
