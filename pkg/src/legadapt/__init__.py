"""Adaptive nonparametric regression and density estimation by series
expansion in the orthonormal Legendre basis.

The truncation level is chosen by minimizing the tail-block energy of the
empirical coefficients; confidence intervals for the integrated squared
error come from pilot blocks of the same scan.  Hot kernels run in a
compiled extension when available (see legadapt._backend.BACKEND).
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .confidence import (
    ConfidenceReport,
    DegenerateIntervalError,
    TailBound,
    confidence_radius,
    decay_ratio,
    noise_tail_exponent,
    pilot_block_size,
    refined_confidence_radius,
)
from .estimators import (
    AdaptiveFit,
    CoeffTable,
    DensitySample,
    RegressionSample,
    TailScan,
    density_coeffs,
    design_grid,
    estimate_noise_variance,
    evaluate,
    fit_adaptive,
    fit_projection,
    ise_parseval,
    regression_coeffs,
    tail_energy_scan,
)
from .legendre import (
    QuadratureRule,
    christoffel_darboux,
    gauss_legendre_rule,
    legendre_l_row,
    legendre_p,
    legendre_p_deriv,
)
from .campaign import (
    CampaignConfig,
    CampaignResult,
    TrialReport,
    calibrate_tail_scale,
    load_campaign_config,
    run_campaign,
)
from .synth import (
    NoiseModel,
    OracleRisk,
    SyntheticModel,
    make_density_truth,
    make_truth,
    oracle_risk,
    quadrature_coeffs,
    simulate_density,
    simulate_regression,
)

__all__ = [
    "__version__",
    "BACKEND",
    "QuadratureRule",
    "legendre_p",
    "legendre_l_row",
    "legendre_p_deriv",
    "christoffel_darboux",
    "gauss_legendre_rule",
    "RegressionSample",
    "DensitySample",
    "CoeffTable",
    "TailScan",
    "AdaptiveFit",
    "design_grid",
    "regression_coeffs",
    "density_coeffs",
    "tail_energy_scan",
    "fit_projection",
    "fit_adaptive",
    "evaluate",
    "estimate_noise_variance",
    "ise_parseval",
    "pilot_block_size",
    "decay_ratio",
    "confidence_radius",
    "noise_tail_exponent",
    "refined_confidence_radius",
    "TailBound",
    "ConfidenceReport",
    "DegenerateIntervalError",
    "SyntheticModel",
    "NoiseModel",
    "OracleRisk",
    "make_truth",
    "make_density_truth",
    "simulate_regression",
    "simulate_density",
    "oracle_risk",
    "quadrature_coeffs",
    "CampaignConfig",
    "CampaignResult",
    "TrialReport",
    "load_campaign_config",
    "run_campaign",
    "calibrate_tail_scale",
]
