"""Skewed log-Birnbaum-Saunders regression with local influence diagnostics."""

from .errors import (
    ConstantColumnError,
    ConvergenceError,
    ConvergenceWarning,
    DomainError,
    EigenFailure,
    InvalidPair,
    ParseError,
    RankError,
    SingularityError,
    StationarityWarning,
)
from .diagnostics import (
    DeltaMatrix,
    InfluenceReport,
    LeverageMatrix,
    Scheme,
    curvature,
    curvature_dmax,
    curvature_dmax_subset,
    delta_case_weights,
    delta_covariate,
    delta_response,
    generalized_leverage,
    local_influence,
)
from .fitting import (
    FitOptions,
    FitResult,
    LrTestResult,
    RelativeChangeRow,
    fit,
    fit_restricted,
    lr_test,
    relative_changes,
    starting_values,
)
from .regression import (
    Dataset,
    InfoBlocks,
    ModelParams,
    XiPair,
    info_blocks,
    loglik,
    observed_information,
    score,
    xi,
)
from .special_fns import CCoefficients, QuadratureRule, c_coefficients, mills_ratio_sn
from .ssn_dist import SsnParams, ssn_cdf, ssn_logpdf, ssn_mean, ssn_pdf, ssn_sample

__version__ = "0.1.0"
