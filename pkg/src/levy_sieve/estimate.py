"""Projection estimators, contrast, penalties and penalized model selection."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .bases import LinearModel, ModelCollection, collection_constants, expected_vhat
from .model import LevyModel, model_constants
from .simulate import JumpSample

PENALTY_FORMS = ("a", "b", "c", "raw32")
_FORM_ALIASES = {"raw-3.2": "raw32", "raw3.2": "raw32"}

BIAS_TOLERANCE = 1e-9
DECOMPOSITION_TOLERANCE = 1e-6
# criteria closer than this (relative) count as tied
TIE_TOLERANCE = 1e-12


class NumericalConsistencyError(ArithmeticError):
    """A quantity that is non-negative in exact arithmetic came out negative."""


class HorizonTooSmallError(ValueError):
    """No model of the collection satisfies ``D_m <= T``."""


@dataclass(frozen=True)
class ProjectionEstimate:
    model: LinearModel
    beta_hat: np.ndarray
    T: float

    def __post_init__(self):
        b = np.asarray(self.beta_hat, dtype=float)
        if b.shape != (self.model.dim,):
            raise ValueError(f"expected {self.model.dim} coefficients, got shape {b.shape}")
        object.__setattr__(self, "beta_hat", b)

    def __call__(self, x):
        return self.model.evaluate(self.beta_hat, x)

    @property
    def sq_norm(self) -> float:
        return float(np.dot(self.beta_hat, self.beta_hat))


def _basis_sums(model: LinearModel, x: np.ndarray, with_sumsq: bool = False):
    """``sum_j phi_i(x_j)`` for every ``i`` (and ``sum_j sum_i phi_i(x_j)**2``)."""
    if len(x) == 0:
        sums, sq = np.zeros(model.dim), 0.0
    else:
        cells, vals = model.local_values(x)
        out = np.empty((model.m, model.k + 1))
        for l in range(model.k + 1):
            out[:, l] = np.bincount(cells, weights=vals[:, l], minlength=model.m)
        sums, sq = out.ravel(), float(np.sum(vals * vals))
    return (sums, sq) if with_sumsq else sums


def _in_window(jumps: JumpSample, model: LinearModel) -> np.ndarray:
    return jumps.sizes[model.measure.contains(jumps.sizes)]


def fit_projection(jumps: JumpSample, model: LinearModel) -> ProjectionEstimate:
    """``beta_i = (1/T) sum_j phi_i(x_j)`` over the jumps falling in the window."""
    return ProjectionEstimate(model, _basis_sums(model, _in_window(jumps, model)) / jumps.T, jumps.T)


def fit_with_vhat(jumps: JumpSample, model: LinearModel) -> tuple[ProjectionEstimate, float]:
    """Projection estimate and ``vhat`` from a single basis evaluation."""
    sums, sq = _basis_sums(model, _in_window(jumps, model), with_sumsq=True)
    return ProjectionEstimate(model, sums / jumps.T, jumps.T), sq / jumps.T


class Projection(NamedTuple):
    """Orthogonal projection of ``s`` on a model, with its squared bias."""

    coef: np.ndarray
    bias_sq: float
    s_l2sq: float


def project_density(levy: LevyModel, model: LinearModel) -> Projection:
    """Coefficients ``int phi_i s deta`` and ``||s - s_perp||^2``.

    ``||s||^2`` is integrated with the same rule as the coefficients, which keeps
    the bias and the risk decomposition consistent to rounding.
    """
    r = model.rule(levy.breaks)
    sv = levy.s(r.nodes)
    ws = r.weights * sv
    coef = np.zeros((model.m, model.k + 1))
    for l in range(model.k + 1):
        coef[:, l] = np.bincount(r.cells, weights=ws * r.local[:, l], minlength=model.m)
    coef = coef.ravel()
    s_l2sq = float(np.dot(ws, sv))
    bias = s_l2sq - float(np.dot(coef, coef))
    if bias < -BIAS_TOLERANCE:
        raise NumericalConsistencyError(f"negative squared bias {bias:.3e} for m={model.m}")
    return Projection(coef, max(bias, 0.0), s_l2sq)


def contrast(beta, model: LinearModel, jumps: JumpSample) -> float:
    """``-(2/T) sum_j f(x_j) + ||f||^2`` for ``f = sum_i beta_i phi_i``."""
    beta = np.asarray(beta, dtype=float)
    x = _in_window(jumps, model)
    fx = model.evaluate(beta, x) if len(x) else np.zeros(0)
    return float(-2.0 / jumps.T * fx.sum() + np.dot(beta, beta))


def vhat(jumps: JumpSample, model: LinearModel) -> float:
    """``(1/T) sum_j sum_i phi_i(x_j)**2``."""
    x = _in_window(jumps, model)
    if len(x) == 0:
        return 0.0
    return float(model.sumsq(x).sum() / jumps.T)


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty form and constants.

    ``a``: c D_m N / T^2 + c1 d_m / T
    ``b``: c Vhat_m / T
    ``c``: c Vhat_m / T + c1 D_m / T + c2 d_m / T
    ``raw32``: 2 Vhat_m / T, the unbiased variance correction.
    """

    form: str = "c"
    c: float = 2.0
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        form = _FORM_ALIASES.get(self.form, self.form)
        if form not in PENALTY_FORMS:
            raise ValueError(f"penalty form must be one of {PENALTY_FORMS}, got {self.form!r}")
        object.__setattr__(self, "form", form)
        if not self.c > 1:
            raise ValueError(f"penalty constant c must be > 1, got {self.c}")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError(f"penalty constants c1, c2 must be > 0, got {self.c1}, {self.c2}")


def penalty(config: PenaltyConfig, model: LinearModel, jumps: JumpSample,
            v: Optional[float] = None) -> float:
    """Penalty of ``model``; ``v`` may pass a precomputed ``vhat``."""
    T = jumps.T
    if config.form == "a":
        n = int(np.count_nonzero(model.measure.contains(jumps.sizes)))
        return config.c * model.D_m * n / T ** 2 + config.c1 * model.dim / T
    if v is None:
        v = vhat(jumps, model)
    if config.form == "b":
        return config.c * v / T
    if config.form == "c":
        return config.c * v / T + config.c1 * model.D_m / T + config.c2 * model.dim / T
    return 2.0 * v / T


@dataclass(frozen=True)
class SelectionRow:
    m: int
    d_m: int
    D_m: float
    neg_sq_norm: float
    pen: float
    criterion: float


@dataclass(frozen=True)
class SelectionResult:
    m_hat: int
    ppe: ProjectionEstimate
    table: tuple[SelectionRow, ...]
    excluded: tuple[int, ...]
    estimates: tuple[ProjectionEstimate, ...]
    diagnostics: tuple[str, ...] = ()


def argmin_smallest(crit: np.ndarray, dims: np.ndarray) -> int:
    """Index of the minimum criterion; among near-ties the smallest dimension wins."""
    lo = float(np.min(crit))
    tied = np.flatnonzero(crit <= lo + TIE_TOLERANCE * max(1.0, abs(lo)))
    return int(tied[np.argmin(dims[tied])])


def select_model(jumps: JumpSample, coll: ModelCollection, config: PenaltyConfig,
                 levy: Optional[LevyModel] = None) -> SelectionResult:
    """Minimize ``-||s_m||^2 + pen(m)`` over the models with ``D_m <= T``.

    Ties go to the smaller dimension.  When the true ``levy`` model is given
    and the form is ``b``, a diagnostic is recorded if the constants that
    form relies on are not positive.
    """
    T = jumps.T
    admissible = coll.admissible(T)
    if not admissible:
        raise HorizonTooSmallError(
            f"no model with D_m <= T={T}; smallest D_m is {min(lm.D_m for lm in coll.models)}")
    kept = {lm.m for lm in admissible}
    excluded = tuple(lm.m for lm in coll.models if lm.m not in kept)
    rows, fits = [], []
    for lm in admissible:
        est, v = fit_with_vhat(jumps, lm)
        pen = penalty(config, lm, jumps, v)
        rows.append(SelectionRow(lm.m, lm.dim, lm.D_m, -est.sq_norm, pen, pen - est.sq_norm))
        fits.append(est)
    best = argmin_smallest(np.array([r.criterion for r in rows]), np.array([r.d_m for r in rows]))
    diagnostics = ()
    if config.form == "b" and levy is not None:
        cc = collection_constants(coll, levy)
        if cc.beta <= 0 or cc.phi_inf <= 0:
            msg = f"form b assumptions violated: beta={cc.beta:.3g}, phi={cc.phi_inf:.3g}"
            warnings.warn(msg)
            diagnostics = (msg,)
    return SelectionResult(rows[best].m, fits[best], tuple(rows), excluded, tuple(fits), diagnostics)


class ChiSquared(NamedTuple):
    expectation: float
    bound: float


def chi_squared_expectation(levy: LevyModel, model: LinearModel, T: float) -> ChiSquared:
    """``E[chi^2] = (1/T) sum_i int phi_i^2 s deta`` and the bound ``sup s * d_m / T``."""
    return ChiSquared(expected_vhat(levy, model) / T, model_constants(levy).s_sup * model.dim / T)


class L2Error(NamedTuple):
    total: float
    bias_sq: float
    chi_sq: float


def l2_error(est: ProjectionEstimate, levy: LevyModel, projection: Optional[Projection] = None) -> L2Error:
    """``||s - s_hat||^2`` by quadrature, split into bias and estimation error."""
    model = est.model
    proj = projection if projection is not None else project_density(levy, model)
    r = model.rule(levy.breaks)
    b = est.beta_hat.reshape(model.m, model.k + 1)
    resid = levy.s(r.nodes) - np.sum(r.local * b[r.cells], axis=1)
    total = float(np.dot(r.weights, resid * resid))
    diff = est.beta_hat - proj.coef
    chi = float(np.dot(diff, diff))
    if abs(total - proj.bias_sq - chi) > DECOMPOSITION_TOLERANCE * max(1.0, total):
        raise NumericalConsistencyError(
            f"risk decomposition mismatch: total={total!r}, bias+chi={proj.bias_sq + chi!r}")
    return L2Error(total, proj.bias_sq, chi)
