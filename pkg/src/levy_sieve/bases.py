"""Regular piecewise-polynomial sieves, orthonormal in L^2(eta).

Basis functions are stored per cell as polynomial coefficients in the local
variable ``t = (x - mid) / half`` in ``[-1, 1]``; index ``i`` enumerates
cells first, so ``i = j * (k + 1) + l`` is polynomial ``l`` of cell ``j``.
Cells are half-open ``(e_{j-1}, e_j]`` except the first, which also holds
the left end of the window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np

from .model import DEFAULT_ORDER, LEBESGUE, LevyModel, ReferenceMeasure
from .quadrature import gauss_legendre, panel_edges

MAX_DEGREE = 5
MAX_CONDITION = 1e12
SUP_POINTS_PER_CELL = 10_000
MIN_PANELS = 64
# D_m is known to about this relative accuracy; models on the boundary D_m = T stay admissible
ADMISSIBLE_RTOL = 1e-9


class DegreeTooHighError(ValueError):
    """The monomial Gram matrix of a cell is numerically singular."""


class CellRule(NamedTuple):
    """Quadrature nodes on a model's cells with the basis evaluated there."""

    nodes: np.ndarray
    weights: np.ndarray  # eta-weights
    cells: np.ndarray
    local: np.ndarray  # (nodes, k+1) local basis values


@dataclass(frozen=True, eq=False)
class LinearModel:
    """The space of piecewise polynomials of degree ``k`` on ``m`` equal cells."""

    k: int
    m: int
    measure: ReferenceMeasure
    edges: np.ndarray
    coeffs: np.ndarray  # (m, k+1, k+1): coeffs[j, l, p] multiplies t**p
    D_m: float
    _rules: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.m * (self.k + 1)

    @property
    def d_m(self) -> int:
        return self.dim

    def cell_index(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.measure.lo, self.measure.hi
        j = np.ceil((x - lo) * (self.m / (hi - lo))).astype(np.intp) - 1
        j = np.clip(j, 0, self.m - 1)
        # settle rounding against the stored edges: cell j is (e_j, e_{j+1}]
        j += (x > self.edges[j + 1]) & (j < self.m - 1)
        j -= (x <= self.edges[j]) & (j > 0)
        return j

    def local_values(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Cell index and the ``k + 1`` local basis values at each point."""
        x = np.asarray(x, dtype=float)
        j = self.cell_index(x)
        lo, hi = self.edges[j], self.edges[j + 1]
        t = ((2.0 * x - lo - hi) / (hi - lo))[..., None]
        c = self.coeffs[j]
        vals = c[..., self.k]
        for p in range(self.k - 1, -1, -1):
            vals = vals * t + c[..., p]
        return j, vals

    def _check_domain(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(self.measure.contains(x)):
            bad = x[~self.measure.contains(x)].ravel()[0]
            raise ValueError(f"x={bad!r} outside window [{self.measure.lo}, {self.measure.hi}]")
        return x

    def sumsq(self, x) -> np.ndarray:
        """``sum_i phi_i(x)**2``."""
        x = self._check_domain(x)
        _, vals = self.local_values(x)
        return np.sum(vals * vals, axis=-1)

    def evaluate(self, beta, x) -> np.ndarray:
        """``sum_i beta_i phi_i(x)``."""
        x = self._check_domain(x)
        j, vals = self.local_values(x)
        b = np.asarray(beta, dtype=float).reshape(self.m, self.k + 1)
        return np.sum(vals * b[j], axis=-1)

    def rule(self, breaks=(), order: int = DEFAULT_ORDER) -> CellRule:
        """Composite rule aligned with the cell edges and ``breaks``.

        Each cell gets enough equal sub-panels for at least 64 panels overall.
        """
        key = (tuple(breaks), order)
        if key not in self._rules:
            sub = max(1, math.ceil(MIN_PANELS / self.m))
            edges = panel_edges(self.measure.lo, self.measure.hi, self.m * sub,
                                tuple(breaks) + self.measure.breaks)
            nodes, w = gauss_legendre(edges, order)
            cells, local = self.local_values(nodes)
            self._rules[key] = CellRule(nodes, w * self.measure.weight(nodes), cells, local)
        return self._rules[key]


def eval_basis(model: LinearModel, i: int, x):
    """``phi_i(x)`` for the 0-based index ``i``; zero outside its cell."""
    if not 0 <= i < model.dim:
        raise IndexError(f"basis index {i} out of range for dimension {model.dim}")
    x = model._check_domain(x)
    j, vals = model.local_values(x)
    cell, l = divmod(i, model.k + 1)
    out = np.where(j == cell, vals[..., l], 0.0)
    return float(out) if out.ndim == 0 else out


def _orthonormal_cell(lo: float, hi: float, k: int, measure: ReferenceMeasure,
                      sub: int, order: int) -> np.ndarray:
    edges = panel_edges(lo, hi, sub, measure.breaks)
    nodes, w = gauss_legendre(edges, order)
    w = w * measure.weight(nodes)
    t = (2.0 * nodes - lo - hi) / (hi - lo)
    V = t[:, None] ** np.arange(k + 1)
    G = V.T @ (w[:, None] * V)
    if np.linalg.cond(G) > MAX_CONDITION:
        raise DegreeTooHighError(f"monomial Gram matrix singular for degree {k} on [{lo}, {hi}]")
    A = np.eye(k + 1)
    # Cholesky Gram-Schmidt, repeated once to restore orthogonality lost to rounding
    for _ in range(2):
        G_A = A @ G @ A.T
        L = np.linalg.cholesky(G_A)
        A = np.linalg.solve(L, A)
    return A


def sum_squares_sup(model: LinearModel, points_per_cell: int = SUP_POINTS_PER_CELL) -> float:
    """``sup_x sum_i phi_i(x)**2`` on a dense per-cell grid including cell ends."""
    t = np.linspace(-1.0, 1.0, points_per_cell + 1)
    powers = t[:, None] ** np.arange(model.k + 1)
    best = 0.0
    for j in range(model.m):
        vals = powers @ model.coeffs[j].T
        best = max(best, float(np.max(np.sum(vals * vals, axis=1))))
    return best


def build_model(k: int, m: int, measure: ReferenceMeasure, order: int = DEFAULT_ORDER) -> LinearModel:
    """Orthonormal basis of degree-``k`` piecewise polynomials on ``m`` cells."""
    if not 0 <= k <= MAX_DEGREE:
        raise DegreeTooHighError(f"supported degrees are 0..{MAX_DEGREE}, got {k}")
    if m < 1:
        raise ValueError(f"partition count must be >= 1, got {m}")
    edges = np.linspace(measure.lo, measure.hi, m + 1)
    sub = max(1, math.ceil(MIN_PANELS / m)) if measure.kind != LEBESGUE else 1
    coeffs = np.stack([_orthonormal_cell(edges[j], edges[j + 1], k, measure, sub, order)
                       for j in range(m)])
    edges.setflags(write=False)
    coeffs.setflags(write=False)
    lm = LinearModel(k, m, measure, edges, coeffs, 0.0)
    object.__setattr__(lm, "D_m", sum_squares_sup(lm))
    return lm


@lru_cache(maxsize=2048)
def cached_model(k: int, m: int, measure: ReferenceMeasure) -> LinearModel:
    return build_model(k, m, measure)


@dataclass(frozen=True, eq=False)
class ModelCollection:
    """``{S_m^k : m = 1..mmax}`` for a fixed degree.

    At most one model per dimension, so the complexity condition on the
    collection holds with ``gamma = 1`` and ``R = 0``.
    """

    k: int
    measure: ReferenceMeasure
    mmax: int = 64

    gamma = 1.0
    R = 0.0

    def __post_init__(self):
        if self.mmax < 1:
            raise ValueError(f"mmax must be >= 1, got {self.mmax}")

    @cached_property
    def models(self) -> tuple[LinearModel, ...]:
        return tuple(cached_model(self.k, m, self.measure) for m in range(1, self.mmax + 1))

    def admissible(self, T: float) -> list[LinearModel]:
        """Models with ``D_m <= T``, up to the accuracy of ``D_m``."""
        return [lm for lm in self.models if lm.D_m <= T * (1.0 + ADMISSIBLE_RTOL)]


class CollectionConstants(NamedTuple):
    beta: float
    phi_inf: float


def expected_vhat(levy: LevyModel, model: LinearModel) -> float:
    """``int sum_i phi_i**2 s deta``."""
    r = model.rule(levy.breaks)
    return float(np.dot(r.weights, np.sum(r.local ** 2, axis=1) * levy.s(r.nodes)))


def collection_constants(coll: ModelCollection, levy: LevyModel) -> CollectionConstants:
    """``beta = min_m E[Vhat_m] / D_m`` and ``phi = min_m D_m / d_m``."""
    beta = min(expected_vhat(levy, lm) / lm.D_m for lm in coll.models)
    phi = min(lm.D_m / lm.dim for lm in coll.models)
    return CollectionConstants(beta, phi)
