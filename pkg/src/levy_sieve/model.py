"""Ground-truth Levy models, reference measures and eta-integrals.

A model is described by its density ``s = dnu/deta`` on a window ``D = [lo, hi]``
with respect to a reference measure ``eta(dx) = w(x) dx``.  The Levy density
itself is ``p(x) = s(x) w(x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple, Optional

import numpy as np

from .quadrature import gauss_legendre, panel_edges

DEFAULT_ORDER = 10
DEFAULT_PANELS = 64
SUP_GRID = 100_000

LEBESGUE = "lebesgue"
INVERSE_SQUARE = "inverse-square"
CUSTOM_GRID = "custom-grid"


class ModelError(ValueError):
    """Invalid model definition or a density that cannot be simulated."""


class QuadratureError(ArithmeticError):
    """Non-finite integrand value at a quadrature node."""


@dataclass(frozen=True)
class ReferenceMeasure:
    """``eta(dx) = w(x) dx`` restricted to the window ``[lo, hi]``.

    ``kind`` is one of ``"lebesgue"`` (w = 1), ``"inverse-square"`` (w = x**-2)
    or ``"custom-grid"`` (w linearly interpolated from ``grid``/``values``).
    """

    lo: float
    hi: float
    kind: str = LEBESGUE
    grid: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ModelError(f"window must satisfy lo < hi, got [{lo}, {hi}]")
        if lo < 0.0 < hi:
            raise ModelError(f"window [{lo}, {hi}] contains the origin")
        if self.kind == LEBESGUE:
            pass
        elif self.kind == INVERSE_SQUARE:
            if lo <= 0.0 <= hi:
                raise ModelError("inverse-square measure needs a window bounded away from 0")
        elif self.kind == CUSTOM_GRID:
            g = tuple(float(v) for v in self.grid)
            v = tuple(float(v) for v in self.values)
            if len(g) < 2 or len(g) != len(v):
                raise ModelError("custom-grid measure needs matching grid and values (>= 2 points)")
            if np.any(np.diff(g) <= 0):
                raise ModelError("custom-grid nodes must be strictly increasing")
            if g[0] > lo or g[-1] < hi:
                raise ModelError("custom-grid nodes must cover the window")
            if min(v) <= 0 or not all(math.isfinite(x) for x in v):
                raise ModelError("custom-grid weights must be positive and finite")
            object.__setattr__(self, "grid", g)
            object.__setattr__(self, "values", v)
        else:
            raise ModelError(f"unknown measure kind {self.kind!r}")

    @classmethod
    def lebesgue(cls, lo: float, hi: float) -> "ReferenceMeasure":
        return cls(lo, hi, LEBESGUE)

    @classmethod
    def inverse_square(cls, lo: float, hi: float) -> "ReferenceMeasure":
        return cls(lo, hi, INVERSE_SQUARE)

    @classmethod
    def custom(cls, lo: float, hi: float, grid, values) -> "ReferenceMeasure":
        return cls(lo, hi, CUSTOM_GRID, tuple(grid), tuple(values))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def breaks(self) -> tuple:
        """Points where the weight is not smooth."""
        if self.kind == CUSTOM_GRID:
            return self.grid
        return ()

    def weight(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == LEBESGUE:
            return np.ones_like(x)
        if self.kind == INVERSE_SQUARE:
            return 1.0 / (x * x)
        return np.interp(x, self.grid, self.values)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return (x >= self.lo) & (x <= self.hi)

    def moment(self, j: int) -> float:
        """Closed form of the integral of ``x**j`` against eta over the window."""
        a, b = self.lo, self.hi
        if self.kind == LEBESGUE:
            return (b ** (j + 1) - a ** (j + 1)) / (j + 1)
        if self.kind == INVERSE_SQUARE:
            if j == 1:
                return math.log(abs(b)) - math.log(abs(a))
            return (b ** (j - 1) - a ** (j - 1)) / (j - 1)
        raise ModelError("closed-form moments are not available for custom-grid measures")

    def rule(self, order: int = DEFAULT_ORDER, panels: int = DEFAULT_PANELS, breaks=()):
        """Nodes and eta-weights of the composite Gauss-Legendre rule."""
        edges = panel_edges(self.lo, self.hi, panels, tuple(breaks) + self.breaks)
        nodes, weights = gauss_legendre(edges, order)
        return nodes, weights * self.weight(nodes)


def eta_integral(f: Callable, measure: ReferenceMeasure, order: int = DEFAULT_ORDER,
                 panels: int = DEFAULT_PANELS, breaks=()) -> float:
    """Integral of ``f`` against ``eta`` over the window.

    ``f`` must accept a numpy array.  ``breaks`` are extra panel edges, used for
    kinks of ``f`` so that each panel sees a smooth integrand.
    """
    if order < 2:
        raise ValueError(f"quadrature order must be >= 2, got {order}")
    nodes, weights = measure.rule(order, panels, breaks)
    vals = np.broadcast_to(np.asarray(f(nodes), dtype=float), nodes.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        x = nodes[np.argmax(bad)]
        raise QuadratureError(f"integrand is not finite at node x={x!r}")
    return float(np.dot(weights, vals))


class ModelConstants(NamedTuple):
    rho: float
    s_sup: float
    s_l2sq: float


@dataclass(frozen=True, eq=False)
class LevyModel:
    """A Levy process whose jump part is known through ``s`` on the window.

    ``s`` is the density of the Levy measure with respect to ``measure``; it
    must accept numpy arrays.  ``breaks`` lists points where ``s`` is not
    smooth (used to align quadrature panels and the sup grid).  ``constants``
    holds closed-form (rho, sup s, ||s||^2) when known, and ``inverse_cdf``
    maps uniforms to jump sizes with density ``p / rho`` when available.
    """

    name: str
    s: Callable
    measure: ReferenceMeasure
    sigma: float = 0.0
    drift: float = 0.0
    alpha: float = math.inf
    breaks: tuple = ()
    constants: Optional[ModelConstants] = None
    inverse_cdf: Optional[Callable] = None
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.sigma < 0:
            raise ModelError(f"gaussian sigma must be >= 0, got {self.sigma}")
        if not self.alpha > 0:
            raise ModelError(f"smoothness alpha must be > 0, got {self.alpha}")
        grid = sup_grid(self.measure, self.breaks, 2001)
        vals = np.asarray(self.s(grid), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ModelError(f"{self.name}: s is not finite on the window")
        if np.any(vals <= 0):
            raise ModelError(f"{self.name}: s must be positive on the window")

    @property
    def window(self) -> tuple[float, float]:
        return self.measure.lo, self.measure.hi

    def p(self, x):
        """Levy density with respect to Lebesgue measure."""
        return self.s(x) * self.measure.weight(x)

    def with_diffusion(self, sigma: float = 0.0, drift: float = 0.0) -> "LevyModel":
        return LevyModel(self.name, self.s, self.measure, sigma, drift, self.alpha,
                         self.breaks, self.constants, self.inverse_cdf, self.params)


def sup_grid(measure: ReferenceMeasure, breaks=(), n: int = SUP_GRID) -> np.ndarray:
    grid = np.linspace(measure.lo, measure.hi, n)
    extra = np.asarray([b for b in tuple(breaks) + measure.breaks
                        if measure.lo <= b <= measure.hi], dtype=float)
    return np.unique(np.concatenate([grid, extra]))


def model_constants(model: LevyModel) -> ModelConstants:
    """(rho, sup s, ||s||_eta^2), closed form when the model carries it."""
    if model.constants is not None:
        return model.constants
    rho = eta_integral(model.s, model.measure, breaks=model.breaks)
    l2 = eta_integral(lambda x: model.s(x) ** 2, model.measure, breaks=model.breaks)
    sup = float(np.max(model.s(sup_grid(model.measure, model.breaks))))
    return ModelConstants(rho, sup, l2)


# ---------------------------------------------------------------------------
# catalog

def _measure(window, measure) -> ReferenceMeasure:
    if isinstance(measure, ReferenceMeasure):
        return measure
    lo, hi = window
    return ReferenceMeasure(lo, hi, measure)


def _polynomial_constants(coefs, meas: ReferenceMeasure) -> ModelConstants:
    # s(x) = sum_j coefs[j] x**j, positive on the window
    c = np.asarray(coefs, dtype=float)
    rho = sum(c[j] * meas.moment(j) for j in range(len(c)))
    sq = np.polynomial.polynomial.polymul(c, c)
    l2 = sum(sq[j] * meas.moment(j) for j in range(len(sq)))
    sup = max(np.polynomial.polynomial.polyval([meas.lo, meas.hi], c))
    return ModelConstants(float(rho), float(sup), float(l2))


def constant(lam: float = 10.0, window=(0.0, 1.0), measure=LEBESGUE) -> LevyModel:
    """``s == lam`` on the window."""
    lam = float(lam)
    if not lam > 0:
        raise ModelError(f"constant model needs lambda > 0, got {lam}")
    meas = _measure(window, measure)
    a, b = meas.lo, meas.hi
    inv = None
    if meas.kind == LEBESGUE:
        def inv(u):
            return a + u * (b - a)
    elif meas.kind == INVERSE_SQUARE:
        def inv(u):
            return 1.0 / (1.0 / a - u * (1.0 / a - 1.0 / b))
    consts = None
    if meas.kind != CUSTOM_GRID:
        consts = ModelConstants(lam * meas.moment(0), lam, lam * lam * meas.moment(0))
    return LevyModel("constant", lambda x: np.full(np.shape(x), lam), meas,
                     constants=consts, inverse_cdf=inv, params={"lambda": lam})


def linear_ramp(intercept: float = 5.0, slope: float = 10.0, window=(0.0, 1.0),
                measure=LEBESGUE) -> LevyModel:
    """``s(x) = intercept + slope * x``."""
    meas = _measure(window, measure)
    c0, c1 = float(intercept), float(slope)
    consts = _polynomial_constants([c0, c1], meas) if meas.kind != CUSTOM_GRID else None
    return LevyModel("linear-ramp", lambda x: c0 + c1 * np.asarray(x, dtype=float), meas,
                     constants=consts, params={"intercept": c0, "slope": c1})


def truncated_exponential(scale: float = 20.0, window=(0.0, 1.0)) -> LevyModel:
    """``s(x) = scale * exp(-x)`` on a Lebesgue window."""
    c = float(scale)
    if not c > 0:
        raise ModelError(f"scale must be > 0, got {c}")
    meas = ReferenceMeasure.lebesgue(*window)
    a, b = meas.lo, meas.hi
    ea, eb = math.exp(-a), math.exp(-b)
    consts = ModelConstants(c * (ea - eb), c * ea, c * c * (ea * ea - eb * eb) / 2.0)

    def inv(u):
        return -np.log(ea - u * (ea - eb))

    return LevyModel("truncated-exponential", lambda x: c * np.exp(-np.asarray(x, dtype=float)),
                     meas, alpha=math.inf, constants=consts, inverse_cdf=inv,
                     params={"scale": c})


def lipschitz_kink(base: float = 4.0, slope: float = 24.0, x0: float = 0.3,
                   window=(0.0, 1.0)) -> LevyModel:
    """Piecewise-linear ``s(x) = base + slope * |x - x0|`` (Lipschitz, alpha = 1)."""
    base, slope, x0 = float(base), float(slope), float(x0)
    meas = ReferenceMeasure.lebesgue(*window)
    a, b = meas.lo, meas.hi
    if not a <= x0 <= b:
        raise ModelError(f"kink location {x0} outside window [{a}, {b}]")
    l, r = x0 - a, b - x0
    rho = base * (b - a) + slope * (l * l + r * r) / 2.0
    l2 = base * base * (b - a) + base * slope * (l * l + r * r) + slope * slope * (l ** 3 + r ** 3) / 3.0
    sup = max(base, base + slope * max(l, r))
    if min(base, base + slope * max(l, r)) <= 0:
        raise ModelError("lipschitz-kink density must stay positive on the window")
    return LevyModel("lipschitz-kink",
                     lambda x: base + slope * np.abs(np.asarray(x, dtype=float) - x0),
                     meas, alpha=1.0, breaks=(x0,),
                     constants=ModelConstants(rho, sup, l2),
                     params={"base": base, "slope": slope, "x0": x0})


def _graded(x0: float, lo: float, hi: float, levels: int = 40) -> tuple:
    span = max(x0 - lo, hi - x0)
    pts = [x0]
    for j in range(1, levels + 1):
        d = span * 2.0 ** -j
        pts += [x0 - d, x0 + d]
    return tuple(p for p in pts if lo <= p <= hi)


def holder(alpha: float = 0.5, coef: float = 10.0, x0: float = 0.5, base: float = 5.0,
           window=(0.0, 1.0)) -> LevyModel:
    """``s(x) = base + coef * |x - x0|**alpha``; smoothness ``alpha`` at ``x0``.

    Quadrature panels are graded geometrically towards ``x0`` so that the
    algebraic singularity of the derivative does not spoil integrals.
    """
    alpha, coef, x0, base = float(alpha), float(coef), float(x0), float(base)
    if not alpha > 0:
        raise ModelError(f"alpha must be > 0, got {alpha}")
    if not (base > 0 and coef >= 0):
        raise ModelError("holder density needs base > 0 and coef >= 0")
    meas = ReferenceMeasure.lebesgue(*window)
    a, b = meas.lo, meas.hi
    if not a <= x0 <= b:
        raise ModelError(f"x0 = {x0} outside window [{a}, {b}]")
    l, r = x0 - a, b - x0

    def mom(q):
        return (l ** (q + 1) + r ** (q + 1)) / (q + 1)

    rho = base * (b - a) + coef * mom(alpha)
    l2 = base * base * (b - a) + 2 * base * coef * mom(alpha) + coef * coef * mom(2 * alpha)
    sup = base + coef * max(l, r) ** alpha
    return LevyModel("holder",
                     lambda x: base + coef * np.abs(np.asarray(x, dtype=float) - x0) ** alpha,
                     meas, alpha=alpha, breaks=_graded(x0, a, b),
                     constants=ModelConstants(rho, sup, l2),
                     params={"alpha": alpha, "coef": coef, "x0": x0, "base": base})


def inverse_square_compensated(c: float = 10.0, window=(1.0, 2.0)) -> LevyModel:
    """``p(x) = c / x`` with ``eta(dx) = x**-2 dx``, so that ``s(x) = c x``."""
    c = float(c)
    meas = ReferenceMeasure.inverse_square(*window)
    a, b = meas.lo, meas.hi
    if a <= 0:
        raise ModelError("inverse-square-compensated model needs a window with lo > 0")
    if not c > 0:
        raise ModelError(f"c must be > 0, got {c}")
    consts = _polynomial_constants([0.0, c], meas)

    def inv(u):
        return a * (b / a) ** u

    return LevyModel("inverse-square-compensated", lambda x: c * np.asarray(x, dtype=float),
                     meas, constants=consts, inverse_cdf=inv, params={"c": c})


CATALOG: dict[str, Callable[..., LevyModel]] = {
    "constant": constant,
    "linear-ramp": linear_ramp,
    "truncated-exponential": truncated_exponential,
    "lipschitz-kink": lipschitz_kink,
    "holder": holder,
    "inverse-square-compensated": inverse_square_compensated,
}


def default_catalog() -> list[LevyModel]:
    """One instance of every catalog entry with its default parameters."""
    return [
        constant(10.0),
        constant(20.0, (1.0, 2.0), INVERSE_SQUARE),
        linear_ramp(),
        truncated_exponential(),
        lipschitz_kink(),
        holder(),
        inverse_square_compensated(),
    ]


def from_params(name: str, params: Mapping, window=None, measure: str = LEBESGUE) -> LevyModel:
    """Build a catalog model from a string id and a parameter map."""
    try:
        ctor = CATALOG[name]
    except KeyError:
        raise ModelError(f"unknown model {name!r}; valid: {', '.join(sorted(CATALOG))}") from None
    kwargs = dict(params)
    if "lambda" in kwargs:
        kwargs["lam"] = kwargs.pop("lambda")
    if window is not None:
        kwargs["window"] = tuple(window)
    if name in ("constant", "linear-ramp"):
        kwargs["measure"] = measure
    elif measure not in (None, LEBESGUE) and name != "inverse-square-compensated":
        raise ModelError(f"model {name!r} is only defined for the lebesgue measure")
    try:
        return ctor(**kwargs)
    except TypeError as exc:
        raise ModelError(f"bad parameters for model {name!r}: {exc}") from None
