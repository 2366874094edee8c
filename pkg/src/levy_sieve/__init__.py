"""Nonparametric estimation of Levy densities with penalized piecewise-polynomial sieves."""

__version__ = "0.1.0"

from .bases import LinearModel, ModelCollection, build_model, eval_basis
from .discrete import ThresholdRule, fit_projection_discrete, integral_stat, thresholded_stat
from .estimate import (
    PenaltyConfig,
    ProjectionEstimate,
    chi_squared_expectation,
    fit_projection,
    l2_error,
    penalty,
    select_model,
)
from .model import LevyModel, ReferenceMeasure, default_catalog, from_params
from .simulate import IncrementSample, JumpSample, RngStream, sample_increments, sample_jumps

__all__ = [
    "IncrementSample", "JumpSample", "LevyModel", "LinearModel", "ModelCollection",
    "PenaltyConfig", "ProjectionEstimate", "ReferenceMeasure", "RngStream", "ThresholdRule",
    "build_model", "chi_squared_expectation", "default_catalog", "eval_basis",
    "fit_projection", "fit_projection_discrete", "from_params", "integral_stat", "l2_error",
    "penalty", "sample_increments", "sample_jumps", "select_model", "thresholded_stat",
]
