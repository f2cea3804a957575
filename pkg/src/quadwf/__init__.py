"""Recovery of complex signals from full-rank random quadratic measurements.

Measurements ``y_i = x^H A_i x`` with rotation-invariant sub-Gaussian
``A_i`` are inverted (up to a global phase) by a spectral initializer
followed by Wirtinger flow.
"""
from .ensemble import (
    EnsembleSpec,
    MeasurementEnsemble,
    build_ensemble,
    gamma_scale,
    measure,
    sample_coefficient_vector,
    sample_matrix,
)
from .flow import DivergenceError, RecoveryResult, SolverConfig, WirtingerFlow, gradient, loss, wf_run
from .linalg import (
    AlignedDistance,
    ConvergenceError,
    DegenerateMatrixError,
    aligned_distance,
    leading_singular_pair,
    quad_form,
    relative_distance,
    spectral_norm,
)
from .spectral import InitResult, SpectralInitializer, build_S, estimate_norm4, spectral_initializer

__version__ = "0.1.0"

__all__ = [
    "AlignedDistance", "ConvergenceError", "DegenerateMatrixError", "DivergenceError",
    "EnsembleSpec", "InitResult", "MeasurementEnsemble", "RecoveryResult", "SolverConfig",
    "SpectralInitializer", "WirtingerFlow", "aligned_distance", "build_S", "build_ensemble",
    "estimate_norm4", "gamma_scale", "gradient", "leading_singular_pair", "loss", "measure",
    "quad_form", "relative_distance", "sample_coefficient_vector", "sample_matrix",
    "spectral_initializer", "spectral_norm", "wf_run",
]
