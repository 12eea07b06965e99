"""Estimation bounds, geometry, pilot allocation, detection and estimation for
rain-rate sensing on multi-carrier satellite downlinks."""

from __future__ import annotations

__version__ = "0.1.0"

from .config import RunConfig
from .errors import (ConfigError, DomainError, NoSolutionError, NumericError, RainboundError,
                     SeriesFormatError, UndetectableError)
from .fisher_bounds import BoundResult, RainPrior, bcrb, crb_joint_schur, fim, prior_fisher_info, rmin_solve
from .itu_atmos import AtmosphericState, FrequencyGrid, PathGeometry, sensitivity_matrix
from .scenario import LinkConfig, NoiseModel

__all__ = [
    "AtmosphericState", "BoundResult", "ConfigError", "DomainError", "FrequencyGrid", "LinkConfig",
    "NoSolutionError", "NoiseModel", "NumericError", "PathGeometry", "RainPrior", "RainboundError", "RunConfig",
    "SeriesFormatError", "UndetectableError", "bcrb", "crb_joint_schur", "fim", "prior_fisher_info",
    "rmin_solve", "sensitivity_matrix",
]
