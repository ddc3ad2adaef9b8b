"""Numerical laboratory for static vacuum metrics with cosmological constant -3.

Closed-form model family, pseudo-radial comparison machinery, curvature
identity verification, and horizon shooting, all at desk scale.
"""

from .errors import (ConstraintBlowup, ConvergenceFailure, CriticalPoint,
                     DegenerateDerivative, DomainError, GridTooCoarse,
                     KottlerLabError, MassOutOfRange, QuadratureFailure,
                     StepSizeUnderflow, TailTooShort)
from .geometry import (RadialProfile, WFunction, bochner_residual,
                       level_set_geometry, scalar_curvature, static_residuals,
                       traceless_identity_rhs, traceless_residual_array)
from .identities import (AnnulusSpec, VerificationReport, area_bound_check,
                         asymptotic_w_difference, bulk_integral,
                         divergence_identity_check, expansion_fit,
                         flux_integral, flux_limit_check, flux_probe_sequence,
                         gradient_comparison, mono_check)
from .models import (M_CRIT, R_CRIT, HorizonData, KottlerModel,
                     genus_quotient_area, gradient_norm_sq, horizon_radius,
                     mass_from_surface_gravity, metric_coefficient,
                     model_horizon_area, surface_gravity)
from .pseudoradial import PseudoRadialMap
from .shooting import (HorizonSeed, ShotResult, conformal_infinity,
                       degenerate_slice_limit, derive_system, integrate,
                       series_state, warped_static_rhs)

__version__ = "0.1.0"

__all__ = [
    "AnnulusSpec", "ConstraintBlowup", "ConvergenceFailure", "CriticalPoint",
    "DegenerateDerivative", "DomainError", "GridTooCoarse", "HorizonData",
    "HorizonSeed", "KottlerLabError", "KottlerModel", "M_CRIT",
    "MassOutOfRange", "PseudoRadialMap", "QuadratureFailure", "R_CRIT",
    "RadialProfile", "ShotResult", "StepSizeUnderflow", "TailTooShort",
    "VerificationReport", "WFunction", "area_bound_check",
    "asymptotic_w_difference", "bochner_residual", "bulk_integral",
    "conformal_infinity", "degenerate_slice_limit", "derive_system",
    "divergence_identity_check", "expansion_fit", "flux_integral",
    "flux_limit_check", "flux_probe_sequence", "genus_quotient_area",
    "gradient_comparison", "gradient_norm_sq", "horizon_radius", "integrate",
    "level_set_geometry", "mass_from_surface_gravity", "metric_coefficient",
    "model_horizon_area", "mono_check", "scalar_curvature", "series_state",
    "static_residuals", "surface_gravity", "traceless_identity_rhs",
    "traceless_residual_array", "warped_static_rhs",
]
