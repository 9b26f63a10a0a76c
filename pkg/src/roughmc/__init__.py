"""Monte-Carlo simulation and option pricing for rough Volterra volatility models."""

from .diagnostics import (
    MomentReport,
    abs_relative_error,
    coefficient_of_variation,
    moment_error_table,
    moment_report,
    sample_abs_moment,
    theoretical_abs_moment,
    variance_reduction_factor,
)
from .fbm import (
    SCHEMES,
    PathBatch,
    cholesky_simulate,
    fbm_covariance,
    fgn_autocovariance,
    hybrid_simulate,
    optimal_bk,
    rdonsker_simulate,
    rescale_by_self_similarity,
    simulate,
)
from .model import ModelBatch, ModelParams, euler_paths, theoretical_vol_moment, variance_path
from .pricing import (
    PriceEstimate,
    apply_safeguard,
    PricingRequest,
    black_scholes_call,
    mc_price,
    modified_turbo_price,
    turbo_components,
    turbo_price,
)
from .rng import (
    BivariateNormalSpec,
    GridSpec,
    SeedSpec,
    bivariate_normals,
    hybrid_sigma,
    standard_normals,
)

__version__ = "0.1.0"

__all__ = [
    "BivariateNormalSpec",
    "GridSpec",
    "ModelBatch",
    "ModelParams",
    "MomentReport",
    "PathBatch",
    "PriceEstimate",
    "PricingRequest",
    "SCHEMES",
    "SeedSpec",
    "abs_relative_error",
    "apply_safeguard",
    "bivariate_normals",
    "black_scholes_call",
    "cholesky_simulate",
    "coefficient_of_variation",
    "euler_paths",
    "fbm_covariance",
    "fgn_autocovariance",
    "hybrid_sigma",
    "hybrid_simulate",
    "mc_price",
    "moment_error_table",
    "moment_report",
    "modified_turbo_price",
    "optimal_bk",
    "rdonsker_simulate",
    "rescale_by_self_similarity",
    "sample_abs_moment",
    "simulate",
    "standard_normals",
    "theoretical_abs_moment",
    "theoretical_vol_moment",
    "turbo_components",
    "turbo_price",
    "variance_path",
    "variance_reduction_factor",
]
