"""Increment-based approximations of Poisson integrals."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bases import LinearModel
from .estimate import ProjectionEstimate, _basis_sums
from .simulate import IncrementSample


@dataclass(frozen=True)
class ThresholdRule:
    """``r(h) = kappa * h**gamma``; ``gamma = 0`` gives the constant rule ``kappa``."""

    kappa: float = 1.0
    gamma: float = 0.9

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if not 0 <= self.gamma < 1:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")

    @classmethod
    def constant(cls, r: float) -> "ThresholdRule":
        return cls(kappa=r, gamma=0.0)

    def __call__(self, h: float) -> float:
        return self.kappa * h ** self.gamma


def _apply(f: Callable, x: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)


def integral_stat(incr: IncrementSample, f: Callable) -> float:
    """``sum_k f(dX_k)``, skipping increments that are exactly zero."""
    x = incr.increments[incr.increments != 0.0]
    return float(_apply(f, x).sum()) if len(x) else 0.0


def passing(incr: IncrementSample, rule: ThresholdRule) -> np.ndarray:
    """Mask of increments with ``dX_k**2 > r(h)``."""
    dx = incr.increments
    return dx * dx > rule(incr.h)


def thresholded_stat(incr: IncrementSample, f: Callable, rule: ThresholdRule) -> float:
    """``sum_k f(dX_k) 1[dX_k**2 > r(h)]``."""
    x = incr.increments[passing(incr, rule)]
    return float(_apply(f, x).sum()) if len(x) else 0.0


def fit_projection_discrete(incr: IncrementSample, model: LinearModel,
                            rule: ThresholdRule) -> ProjectionEstimate:
    """Projection estimator with thresholded increments in place of jumps.

    Increments outside the window contribute nothing.
    """
    x = incr.increments[passing(incr, rule)]
    x = x[model.measure.contains(x)]
    return ProjectionEstimate(model, _basis_sums(model, x) / incr.T, incr.T)
