"""Numerical checks of the Poisson concentration bounds and the helper inequalities."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .simulate import RngStream


def poisson_tail(mean: float, n: int) -> float:
    """``P[N >= n]`` for ``N ~ Poisson(mean)`` by summing the pmf below ``n``."""
    if n <= 0:
        return 1.0
    term = math.exp(-mean)
    cdf = term
    for j in range(1, n):
        term *= mean / j
        cdf += term
    return max(0.0, 1.0 - cdf)


def poisson_cdf_below(mean: float, x: float) -> float:
    """``P[N < x]``."""
    return 1.0 - poisson_tail(mean, math.ceil(x)) if x > 0 else 0.0


def deviation_threshold(mass: float, u: float, sup: float = 1.0) -> float:
    """``||f||_mu sqrt(2u) + ||f||_inf u / 3`` for ``f`` constant ``sup`` on a set of mass ``mass``."""
    return sup * math.sqrt(2.0 * mass * u) + sup * u / 3.0


def lower_deviation(mass: float, u: float, eps: float) -> float:
    """``N`` below this value is the failure event of the lower bound with slack ``eps``."""
    return mass / (1.0 + eps) - (1.0 / (2.0 * eps) + 5.0 / 6.0) * u


@dataclass(frozen=True)
class ConcentrationRow:
    u: float
    bound: float
    threshold: float
    freq_upper: float
    exact_upper: float
    freq_lower_fail: float
    exact_lower_fail: float
    reps: int

    @property
    def binomial_se(self) -> float:
        """SE of an exceedance frequency whose probability equals the bound."""
        return math.sqrt(self.bound * (1.0 - self.bound) / self.reps)

    @property
    def exact_se(self) -> float:
        return math.sqrt(self.exact_upper * (1.0 - self.exact_upper) / self.reps)


@dataclass(frozen=True)
class ConcentrationReport:
    mass: float
    eps: float
    rows: tuple

    CSV_HEADER = ("u", "bound", "threshold", "freq_upper", "exact_upper", "freq_lower_fail",
                  "exact_lower_fail", "reps")

    def csv_rows(self):
        for r in self.rows:
            yield (r.u, r.bound, r.threshold, r.freq_upper, r.exact_upper, r.freq_lower_fail,
                   r.exact_lower_fail, r.reps)


def concentration_check(lam: float, u_grid: Sequence[float], reps: int, T: float = 1.0,
                        eps: float = 1.0, rng: RngStream | None = None) -> ConcentrationReport:
    """Exceedance frequencies of the Poisson deviation events with ``f = 1``.

    The upper event is ``N - L >= sqrt(2 L u) + u / 3`` with ``L = lam * T``; the
    lower one fails when ``(1 + eps)(N + (1/(2 eps) + 5/6) u) < L``.  Both are
    compared with ``exp(-u)`` and with exact Poisson probabilities.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    if any(not u > 0 for u in u_grid):
        raise ValueError("u grid must be positive")
    mass = lam * T
    gen = (rng or RngStream(0)).generator()
    counts = gen.poisson(mass, size=reps)
    rows = []
    for u in u_grid:
        thr = mass + deviation_threshold(mass, u)
        low = lower_deviation(mass, u, eps)
        rows.append(ConcentrationRow(
            u=float(u), bound=math.exp(-u), threshold=thr,
            freq_upper=float(np.mean(counts >= thr)),
            exact_upper=poisson_tail(mass, math.ceil(thr)),
            freq_lower_fail=float(np.mean(counts < low)),
            exact_lower_fail=poisson_cdf_below(mass, low),
            reps=reps))
    return ConcentrationReport(mass, eps, tuple(rows))


def deviation_gap_margin(a, b, eps):
    """``a - sqrt(2ab) - b/3 - (a/(1+eps) - (1/(2 eps) + 5/6) b)``; non-negative for a, b, eps > 0."""
    a, b, eps = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, eps)))
    lhs = a - np.sqrt(2.0 * a * b) - b / 3.0
    rhs = a / (1.0 + eps) - (1.0 / (2.0 * eps) + 5.0 / 6.0) * b
    return lhs - rhs


def deviation_gap_check(a_grid, b_grid, eps_grid, rtol: float = 1e-12) -> tuple[bool, float, int]:
    """Evaluate the inequality on the full grid; returns (all hold, min margin, points)."""
    A, B, E = np.meshgrid(a_grid, b_grid, eps_grid, indexing="ij")
    margin = deviation_gap_margin(A, B, E)
    scale = np.abs(A) + np.abs(B)
    return bool(np.all(margin >= -rtol * scale)), float(margin.min()), margin.size


def tail_mean_bound_check(a: float, b: float, K: float = 1.0) -> bool:
    """Mean bound for ``Z = h(E)``, ``h(x) = a x^2 + b x``, ``E ~ Exp(1)``.

    ``Z`` satisfies ``P[Z >= h(xi)] = exp(-xi)``; the claim is
    ``E[Z] <= K int_0^inf exp(-u) h(u) du``, both sides being ``2a + b`` up to ``K``.
    """
    if a < 0 or b < 0 or (a == 0 and b == 0):
        raise ValueError(f"need a, b >= 0 not both zero, got a={a}, b={b}")
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    mean_z = 2.0 * a + b
    integral, _ = integrate.quad(lambda u: math.exp(-u) * (a * u * u + b * u), 0.0, math.inf)
    if not math.isclose(integral, mean_z, rel_tol=1e-9):
        raise ArithmeticError(f"quadrature {integral} disagrees with closed form {mean_z}")
    return mean_z <= K * integral * (1.0 + 1e-12)
