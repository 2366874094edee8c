"""Monte Carlo experiments: risks, oracle ratios, rates and discrete-data studies."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .bases import LinearModel, ModelCollection, cached_model
from .discrete import ThresholdRule, fit_projection_discrete, integral_stat, passing, thresholded_stat
from .estimate import (
    HorizonTooSmallError,
    argmin_smallest,
    PenaltyConfig,
    ProjectionEstimate,
    chi_squared_expectation,
    fit_projection,
    fit_with_vhat,
    l2_error,
    penalty,
    project_density,
)
from .model import LevyModel, eta_integral, from_params
from .simulate import RngStream, sample_increments, sample_jumps

STAT_FUNCTIONS: dict[str, Callable] = {
    "x": lambda x: x,
    "x2": lambda x: x * x,
    "x3": lambda x: x ** 3,
    "x4": lambda x: x ** 4,
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "risk"
    model_name: str = "constant"
    model_params: dict = field(default_factory=dict)
    window: tuple = (0.0, 1.0)
    measure: str = "lebesgue"
    k: int = 0
    mmax: int = 64
    penalty: PenaltyConfig = PenaltyConfig()
    T: float = 100.0
    t_grid: tuple = ()
    reps: int = 2000
    seed: int = 0
    threads: int = 1
    sigma: float = 0.0
    drift: float = 0.0
    discrete_grid: tuple = ()
    discrete_m: int = 4
    threshold: ThresholdRule = ThresholdRule()
    stat: str = "x2"
    conc_lambda: float = 10.0
    u_grid: tuple = (0.5, 1.0, 2.0, 4.0)
    eps: float = 1.0
    rate_tail3: bool = False

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.t_grid and np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("t.grid must be strictly increasing")

    def levy(self) -> LevyModel:
        lev = from_params(self.model_name, self.model_params, self.window, self.measure)
        return lev.with_diffusion(self.sigma, self.drift)

    def collection(self) -> ModelCollection:
        return ModelCollection(self.k, self.levy().measure, self.mmax)


def _map(fn: Callable, items: Sequence, threads: int) -> list:
    """Ordered map; results come back in input order whatever the scheduling."""
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _mean_se(x: np.ndarray, axis: int = 0):
    x = np.asarray(x, dtype=float)
    mean = x.mean(axis=axis)
    n = x.shape[axis]
    se = x.std(axis=axis, ddof=1) / math.sqrt(n) if n > 1 else np.full_like(mean, np.nan)
    return mean, se


# ---------------------------------------------------------------------------
# fixed-model risk sweeps

@dataclass(frozen=True)
class DecompositionReport:
    """Monte Carlo check of risk = bias^2 + E[chi^2] on a list of models."""

    T: float
    reps: int
    ms: tuple
    total_mean: np.ndarray
    total_se: np.ndarray
    bias_sq: np.ndarray
    chi_mean: np.ndarray
    chi_se: np.ndarray
    chi_expected: np.ndarray
    beta_mean: tuple
    beta_se: tuple
    max_identity_gap: float


def decomposition_mc(levy: LevyModel, models: Sequence[LinearModel], T: float, reps: int,
                     seed: int = 0, key: tuple = (), threads: int = 1) -> DecompositionReport:
    """Sample ``reps`` jump paths and record the error of each fixed model."""
    projs = [project_density(levy, lm) for lm in models]

    def one(r):
        jumps = sample_jumps(levy, T, RngStream(seed, r, key))
        out = []
        for lm, pr in zip(models, projs):
            est = fit_projection(jumps, lm)
            err = l2_error(est, levy, pr)
            out.append((err.total, err.chi_sq, abs(err.total - err.bias_sq - err.chi_sq), est.beta_hat))
        return out

    results = _map(one, range(reps), threads)
    total = np.array([[o[0] for o in rep] for rep in results])
    chi = np.array([[o[1] for o in rep] for rep in results])
    gap = max(o[2] for rep in results for o in rep)
    tm, ts = _mean_se(total)
    cm, cs = _mean_se(chi)
    betas = [_mean_se(np.array([rep[i][3] for rep in results])) for i in range(len(models))]
    return DecompositionReport(
        T, reps, tuple(lm.m for lm in models), tm, ts,
        np.array([p.bias_sq for p in projs]), cm, cs,
        np.array([chi_squared_expectation(levy, lm, T).expectation for lm in models]),
        tuple(b[0] for b in betas), tuple(b[1] for b in betas), gap)


# ---------------------------------------------------------------------------
# penalized selection

@dataclass(frozen=True)
class RiskReport:
    T: float
    reps: int
    ms: np.ndarray
    d_m: np.ndarray
    D_m: np.ndarray
    risk_mean: np.ndarray
    risk_se: np.ndarray
    bias_sq: np.ndarray
    chi_mean: np.ndarray
    chi_expected: np.ndarray
    pen_mean: np.ndarray
    select_freq: np.ndarray
    ppe_risk_mean: float
    ppe_risk_se: float
    m_hat_mean: float
    m_hats: np.ndarray = field(repr=False, default=None)

    @property
    def oracle_m(self) -> int:
        return int(self.ms[np.argmin(self.risk_mean)])

    @property
    def oracle_ratio(self) -> float:
        return self.ppe_risk_mean / float(np.min(self.risk_mean))

    CSV_HEADER = ("m", "d_m", "D_m", "risk_mean", "risk_se", "bias_sq", "chi_mean",
                  "pen_mean", "select_freq")

    def rows(self):
        for i in range(len(self.ms)):
            yield (int(self.ms[i]), int(self.d_m[i]), self.D_m[i], self.risk_mean[i],
                   self.risk_se[i], self.bias_sq[i], self.chi_mean[i], self.pen_mean[i],
                   self.select_freq[i])


def _selection_replication(levy: LevyModel, models, projs, config: PenaltyConfig, T: float,
                           stream: RngStream):
    jumps = sample_jumps(levy, T, stream)
    total = np.empty(len(models))
    chi = np.empty(len(models))
    pens = np.empty(len(models))
    crit = np.empty(len(models))
    for i, (lm, pr) in enumerate(zip(models, projs)):
        est, v = fit_with_vhat(jumps, lm)
        err = l2_error(est, levy, pr)
        total[i], chi[i] = err.total, err.chi_sq
        pens[i] = penalty(config, lm, jumps, v)
        crit[i] = pens[i] - est.sq_norm
    best = argmin_smallest(crit, np.array([lm.dim for lm in models]))
    return total, chi, pens, best


def risk_mc(config: ExperimentConfig, T: Optional[float] = None, key: tuple = ()) -> RiskReport:
    """Monte Carlo risks of every admissible model and of the p.p.e.

    Replication ``r`` draws its jumps from stream ``r``.
    """
    T = config.T if T is None else T
    levy = config.levy()
    coll = ModelCollection(config.k, levy.measure, config.mmax)
    models = coll.admissible(T)
    if not models:
        raise HorizonTooSmallError(f"no model with D_m <= T={T}")
    projs = [project_density(levy, lm) for lm in models]

    def one(r):
        try:
            return _selection_replication(levy, models, projs, config.penalty, T,
                                          RngStream(config.seed, r, key))
        except Exception as exc:
            raise RuntimeError(f"replication {r} failed: {exc}") from exc

    results = _map(one, range(config.reps), config.threads)
    total = np.array([res[0] for res in results])
    chi = np.array([res[1] for res in results])
    pens = np.array([res[2] for res in results])
    best = np.array([res[3] for res in results])
    risk_mean, risk_se = _mean_se(total)
    ppe = total[np.arange(len(best)), best]
    ppe_mean, ppe_se = _mean_se(ppe)
    ms = np.array([lm.m for lm in models])
    return RiskReport(
        T=T, reps=config.reps, ms=ms,
        d_m=np.array([lm.dim for lm in models]),
        D_m=np.array([lm.D_m for lm in models]),
        risk_mean=risk_mean, risk_se=risk_se,
        bias_sq=np.array([p.bias_sq for p in projs]),
        chi_mean=chi.mean(axis=0),
        chi_expected=np.array([chi_squared_expectation(levy, lm, T).expectation for lm in models]),
        pen_mean=pens.mean(axis=0),
        select_freq=np.bincount(best, minlength=len(models)) / config.reps,
        ppe_risk_mean=float(ppe_mean), ppe_risk_se=float(ppe_se),
        m_hat_mean=float(ms[best].mean()), m_hats=ms[best])


@dataclass(frozen=True)
class OracleCheck:
    ratio: float
    additive_slack: float
    passed: Optional[bool]


def oracle_check(report: RiskReport, max_ratio: Optional[float] = None) -> OracleCheck:
    """Ratio of the p.p.e. risk to the best single-model risk."""
    best = float(np.min(report.risk_mean))
    ratio = report.ppe_risk_mean / best
    slack = (report.ppe_risk_mean - best) * report.T
    return OracleCheck(ratio, slack, None if max_ratio is None else bool(ratio <= max_ratio))


# ---------------------------------------------------------------------------
# rates

@dataclass(frozen=True)
class RateResult:
    T: np.ndarray
    risk_mean: np.ndarray
    risk_se: np.ndarray
    m_hat_mean: np.ndarray
    slope: float
    slope_se: float
    notice: str = ""

    CSV_HEADER = ("T", "ppe_risk_mean", "ppe_risk_se", "m_hat_mean")

    def rows(self):
        for i in range(len(self.T)):
            yield (self.T[i], self.risk_mean[i], self.risk_se[i], self.m_hat_mean[i])


def loglog_slope(T, mean, se) -> tuple[float, float]:
    """Least-squares slope of log(mean) on log(T) and its delta-method SE."""
    x = np.log(np.asarray(T, dtype=float))
    y = np.log(np.asarray(mean, dtype=float))
    xc = x - x.mean()
    c = xc / np.dot(xc, xc)
    slope = float(np.dot(c, y))
    rel = np.asarray(se, dtype=float) / np.asarray(mean, dtype=float)
    return slope, float(math.sqrt(np.sum(c * c * rel * rel)))


def rate_experiment(config: ExperimentConfig) -> RateResult:
    """p.p.e. risk over the horizon grid and its log-log slope."""
    grid = np.asarray(config.t_grid, dtype=float)
    if len(grid) < 4 or grid[-1] < 10 * grid[0]:
        raise ValueError("rate experiment needs >= 4 horizons spanning at least a decade")
    reports = [risk_mc(config, T, key=(i,)) for i, T in enumerate(grid)]
    mean = np.array([r.ppe_risk_mean for r in reports])
    se = np.array([r.ppe_risk_se for r in reports])
    mh = np.array([r.m_hat_mean for r in reports])
    if np.any(mean <= 0):
        return RateResult(grid, mean, se, mh, math.nan, math.nan,
                          "non-positive mean risk: s lies in a model exactly, rate check skipped")
    sel = slice(-3, None) if config.rate_tail3 else slice(None)
    slope, slope_se = loglog_slope(grid[sel], mean[sel], se[sel])
    return RateResult(grid, mean, se, mh, slope, slope_se)


# ---------------------------------------------------------------------------
# discrete observations

@dataclass(frozen=True)
class DiscreteReport:
    rows_: tuple
    target: float
    target_var: float

    CSV_HEADER = ("n", "h", "threshold", "istat_mean", "istat_se", "istat_var", "tstat_mean",
                  "tstat_se", "target_mean", "target_var", "paired_l2_mean", "paired_l2_se",
                  "nojump_pass_frac")

    def rows(self):
        return iter(self.rows_)


def discrete_replication(levy: LevyModel, T: float, n: int, f: Callable, lm: LinearModel,
                         rule: ThresholdRule, stream: RngStream):
    """One path: I_n(f), thresholded statistic, paired coefficient distance, false passes."""
    incr, jumps = sample_increments(levy, T, n, stream)
    cont = fit_projection(jumps, lm)
    disc = fit_projection_discrete(incr, lm, rule)
    d = disc.beta_hat - cont.beta_hat
    hit = np.zeros(n, dtype=bool)
    if jumps.count:
        hit[np.clip(np.ceil(jumps.times / incr.h).astype(np.intp) - 1, 0, n - 1)] = True
    quiet = ~hit
    frac = float(passing(incr, rule)[quiet].mean()) if quiet.any() else 0.0
    return integral_stat(incr, f), thresholded_stat(incr, f, rule), float(np.dot(d, d)), frac


def discrete_experiment(config: ExperimentConfig) -> DiscreteReport:
    levy = config.levy()
    f = STAT_FUNCTIONS[config.stat]
    lm = cached_model(config.k, config.discrete_m, levy.measure)
    T = config.T
    target = T * eta_integral(lambda x: f(x) * levy.s(x), levy.measure, breaks=levy.breaks)
    target_var = T * eta_integral(lambda x: f(x) ** 2 * levy.s(x), levy.measure, breaks=levy.breaks)
    rows = []
    for i, n in enumerate(config.discrete_grid):
        n = int(n)
        res = np.array(_map(
            lambda r: discrete_replication(levy, T, n, f, lm, config.threshold,
                                           RngStream(config.seed, r, (i,))),
            range(config.reps), config.threads))
        im, ise = _mean_se(res[:, 0])
        tm, tse = _mean_se(res[:, 1])
        lm_, lse = _mean_se(res[:, 2])
        ivar = float(res[:, 0].var(ddof=1)) if config.reps > 1 else math.nan
        rows.append((n, T / n, config.threshold(T / n), float(im), float(ise), ivar, float(tm),
                     float(tse), target, target_var, float(lm_), float(lse),
                     float(res[:, 3].mean())))
    return DiscreteReport(tuple(rows), target, target_var)
