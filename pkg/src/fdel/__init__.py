"""Frequency-domain empirical likelihood for stationary time series."""

from .elcore import ELConfig, log_el_ratio, solve_dual
from .estimating import EstimatingSystem, parse_system
from .estimators import FDELEstimator, PeriodogramTransformer, SpectralGOFTest
from .exceptions import (
    ConfigurationError,
    EmbeddingFailure,
    EstimationFailure,
    FDELError,
    InfeasibleError,
    InvalidInputError,
    InvalidRequestError,
    NumericalFailure,
)
from .inference import (
    chi_square_quantile,
    confidence_region,
    mele,
    test_constrained,
    test_gof_composite,
    test_gof_simple,
    test_moment_validity,
    test_parameter,
    test_profile,
)
from .models import SpectralModel, get_family, parse_model, simulate_gaussian
from .montecarlo import ExperimentSpec, run_experiment
from .spectral import Periodogram, periodogram

__version__ = "0.1.0"

__all__ = [
    "ELConfig", "log_el_ratio", "solve_dual", "EstimatingSystem", "parse_system",
    "FDELEstimator", "PeriodogramTransformer", "SpectralGOFTest",
    "ConfigurationError", "EmbeddingFailure", "EstimationFailure", "FDELError", "InfeasibleError",
    "InvalidInputError", "InvalidRequestError", "NumericalFailure",
    "chi_square_quantile", "confidence_region", "mele", "test_constrained", "test_gof_composite",
    "test_gof_simple", "test_moment_validity", "test_parameter", "test_profile",
    "SpectralModel", "get_family", "parse_model", "simulate_gaussian",
    "ExperimentSpec", "run_experiment", "Periodogram", "periodogram",
]
