"""Exact simulation of jump samples and discretely observed increments."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import LevyModel, ModelError, model_constants, sup_grid

ENVELOPE_PIECES = 256
# safety factor on the grid maximum of each envelope piece
ENVELOPE_INFLATION = 1.02


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    Streams are derived by hashing the key through ``numpy.random.SeedSequence``
    into a counter-based Philox generator, so replication ``r`` can use
    ``stream_id = r`` without any shared state.  ``key`` optionally separates
    experiment points that reuse replication ids.
    """

    seed: int
    stream_id: int = 0
    key: tuple = ()

    def generator(self) -> np.random.Generator:
        entropy = [int(self.seed) & 0xFFFFFFFFFFFFFFFF, int(self.stream_id), *map(int, self.key)]
        return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class JumpSample:
    """Realized jumps ``(t_i, x_i)`` on ``(0, T] x D`` sorted by time."""

    T: float
    times: np.ndarray
    sizes: np.ndarray

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"horizon T must be > 0, got {self.T}")
        times = np.asarray(self.times, dtype=float)
        sizes = np.asarray(self.sizes, dtype=float)
        if times.shape != sizes.shape or times.ndim != 1:
            raise ValueError("times and sizes must be 1-d arrays of equal length")
        order = np.argsort(times, kind="stable")
        times, sizes = times[order], sizes[order]
        times.setflags(write=False)
        sizes.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "sizes", sizes)

    @property
    def count(self) -> int:
        return len(self.sizes)

    def __len__(self):
        return len(self.sizes)

    @classmethod
    def empty(cls, T: float) -> "JumpSample":
        return cls(T, np.empty(0), np.empty(0))


def superpose(*samples: JumpSample) -> JumpSample:
    """Union of independent jump samples observed over the same horizon."""
    T = samples[0].T
    if any(s.T != T for s in samples):
        raise ValueError("superposed samples must share the horizon")
    return JumpSample(T, np.concatenate([s.times for s in samples]),
                      np.concatenate([s.sizes for s in samples]))


@dataclass(frozen=True)
class IncrementSample:
    """Increments ``X(kh) - X((k-1)h)``, ``k = 1..n``, with ``h = T / n``."""

    T: float
    increments: np.ndarray

    def __post_init__(self):
        inc = np.asarray(self.increments, dtype=float)
        if inc.ndim != 1 or len(inc) < 1:
            raise ValueError("need at least one increment")
        inc.setflags(write=False)
        object.__setattr__(self, "increments", inc)

    @property
    def n(self) -> int:
        return len(self.increments)

    @property
    def h(self) -> float:
        return self.T / self.n


class _Envelope:
    """Piecewise-constant majorant of ``p`` used for rejection sampling."""

    def __init__(self, model: LevyModel, pieces: int = ENVELOPE_PIECES):
        lo, hi = model.window
        grid = sup_grid(model.measure, model.breaks)
        vals = np.asarray(model.p(grid), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ModelError(f"{model.name}: Levy density is not bounded on the window")
        self.edges = np.linspace(lo, hi, pieces + 1)
        first = np.searchsorted(grid, self.edges, side="left")
        height = np.empty(pieces)
        for j in range(pieces):
            # include the neighbouring grid points so each piece covers its closed interval
            i0, i1 = max(first[j] - 1, 0), min(first[j + 1] + 1, len(vals))
            height[j] = vals[i0:i1].max()
        self.height = height * ENVELOPE_INFLATION
        mass = self.height * np.diff(self.edges)
        self.cum = np.cumsum(mass) / mass.sum()
        self.p = model.p

    def draw(self, n: int, gen: np.random.Generator) -> np.ndarray:
        out = np.empty(0)
        while len(out) < n:
            want = int(1.3 * (n - len(out))) + 16
            piece = np.minimum(np.searchsorted(self.cum, gen.random(want), side="right"),
                               len(self.height) - 1)
            x = self.edges[piece] + gen.random(want) * (self.edges[piece + 1] - self.edges[piece])
            keep = gen.random(want) * self.height[piece] < self.p(x)
            out = np.concatenate([out, x[keep]])
        return out[:n]


def sample_sizes(model: LevyModel, n: int, gen: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. jump sizes with density ``p / rho`` on the window."""
    if n == 0:
        return np.empty(0)
    if model.inverse_cdf is not None:
        return np.asarray(model.inverse_cdf(gen.random(n)), dtype=float)
    return _envelope(model).draw(n, gen)


@lru_cache(maxsize=64)
def _envelope(model: LevyModel) -> _Envelope:
    return _Envelope(model)


def sample_jumps(model: LevyModel, T: float, rng) -> JumpSample:
    """Poisson jump measure restricted to ``(0, T] x D``.

    The count is Poisson(``T * rho``); times are uniform on ``(0, T]`` and
    sizes follow ``p / rho``.
    """
    if not T > 0:
        raise ValueError(f"horizon T must be > 0, got {T}")
    gen = _generator(rng)
    rho = model_constants(model).rho
    n = int(gen.poisson(T * rho))
    times = T * (1.0 - gen.random(n))
    return JumpSample(T, times, sample_sizes(model, n, gen))


def increments_from_jumps(jumps: JumpSample, n: int, sigma: float = 0.0, drift: float = 0.0,
                          gen: np.random.Generator | None = None) -> IncrementSample:
    """Grid increments of ``drift t + sigma B(t) + sum of jumps``.

    A jump at time ``t`` belongs to cell ``k`` when ``(k-1) h < t <= k h``.
    """
    if n < 1:
        raise ValueError(f"grid count n must be >= 1, got {n}")
    T = jumps.T
    h = T / n
    inc = np.full(n, drift * h)
    if sigma > 0:
        if gen is None:
            raise ValueError("a generator is required when sigma > 0")
        inc += sigma * np.sqrt(h) * gen.standard_normal(n)
    if jumps.count:
        cell = np.clip(np.ceil(jumps.times / h).astype(np.int64) - 1, 0, n - 1)
        inc += np.bincount(cell, weights=jumps.sizes, minlength=n)
    return IncrementSample(T, inc)


def sample_increments(model: LevyModel, T: float, n: int, rng) -> tuple[IncrementSample, JumpSample]:
    """Exact grid increments of the path plus the jump sample that built them."""
    if n < 1:
        raise ValueError(f"grid count n must be >= 1, got {n}")
    gen = _generator(rng)
    jumps = sample_jumps(model, T, gen)
    return increments_from_jumps(jumps, n, model.sigma, model.drift, gen), jumps
