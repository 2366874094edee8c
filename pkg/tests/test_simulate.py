import numpy as np
import pytest
from scipy import integrate, stats

from levy_sieve.model import constant, default_catalog, holder, lipschitz_kink
from levy_sieve.simulate import (
    IncrementSample,
    JumpSample,
    RngStream,
    increments_from_jumps,
    sample_increments,
    sample_jumps,
    superpose,
)


def test_stream_determinism(const10):
    a = sample_jumps(const10, 50.0, RngStream(123, 4))
    b = sample_jumps(const10, 50.0, RngStream(123, 4))
    c = sample_jumps(const10, 50.0, RngStream(123, 5))
    assert np.array_equal(a.times, b.times) and np.array_equal(a.sizes, b.sizes)
    assert not (a.count == c.count and np.array_equal(a.sizes, c.sizes))


def test_count_moments(const10):
    gen = RngStream(1).generator()
    counts = np.array([sample_jumps(const10, 50.0, gen).count for _ in range(10_000)])
    se = np.sqrt(500.0 / len(counts))
    assert abs(counts.mean() - 500.0) <= 3 * se
    # sd of the sample variance of a Poisson(500) count is about sqrt(2*500**2/n)
    assert abs(counts.var(ddof=1) - 500.0) <= 3 * np.sqrt((2 * 500.0 ** 2 + 500.0) / len(counts))


def test_tiny_horizon_has_no_jumps(const10):
    assert sample_jumps(const10, 1e-9, RngStream(0)).count == 0


def test_sizes_uniform_for_constant(const10):
    x = sample_jumps(const10, 10_000.0, RngStream(2)).sizes[:100_000]
    assert len(x) == 100_000
    obs, _ = np.histogram(x, bins=50, range=(0.0, 1.0))
    assert stats.chisquare(obs).pvalue > 1e-3


@pytest.mark.parametrize("lev", [lipschitz_kink(), holder()], ids=lambda m: m.name)
def test_rejection_sampler_matches_density(lev):
    x = sample_jumps(lev, 5000.0, RngStream(3)).sizes
    grid = np.linspace(*lev.window, 200_001)
    cum = integrate.cumulative_trapezoid(lev.p(grid), grid, initial=0.0)
    cdf = lambda q: np.interp(q, grid, cum / cum[-1])
    assert stats.kstest(x[:20_000], cdf).pvalue > 1e-3


@pytest.mark.parametrize("lev", default_catalog(), ids=lambda m: m.name + str(m.window))
def test_jump_sample_invariants(lev):
    js = sample_jumps(lev, 20.0, RngStream(9))
    assert np.all(lev.measure.contains(js.sizes))
    assert np.all(np.diff(js.times) > 0)
    assert np.all((js.times > 0) & (js.times <= 20.0))
    assert js.count == len(js.sizes)


def test_superposition_count_is_poisson():
    a, b = constant(3.0), constant(7.0)
    gen = RngStream(11).generator()
    counts = np.array([superpose(sample_jumps(a, 2.0, gen), sample_jumps(b, 2.0, gen)).count
                       for _ in range(10_000)])
    total = counts.sum()
    # sum of n Poisson(20) counts is Poisson(20 n): exact two-sided test
    mu = 20.0 * len(counts)
    p = 2 * min(stats.poisson.cdf(total, mu), stats.poisson.sf(total - 1, mu))
    assert p > 1e-3


def test_single_jump_lands_in_first_cell():
    js = JumpSample(1.0, [0.3], [0.5])
    assert np.array_equal(increments_from_jumps(js, 2).increments, [0.5, 0.0])


def test_jump_on_grid_point_belongs_to_left_cell():
    js = JumpSample(1.0, [0.5], [0.4])
    assert np.array_equal(increments_from_jumps(js, 2).increments, [0.4, 0.0])


def test_pure_drift():
    inc = increments_from_jumps(JumpSample.empty(1.0), 4, drift=1.0)
    assert np.allclose(inc.increments, 0.25, rtol=0, atol=1e-15)
    assert inc.h == 0.25 and inc.n == 4


def test_increments_telescope_and_couple():
    lev = constant(10.0).with_diffusion(0.0, 0.0)
    incr, js = sample_increments(lev, 10.0, 1000, RngStream(5))
    assert abs(incr.increments.sum() - js.sizes.sum()) <= 1e-12 * max(1.0, js.count)
    lev = constant(10.0).with_diffusion(0.3, 0.7)
    incr, js = sample_increments(lev, 10.0, 1000, RngStream(5))
    assert incr.n == 1000
    # the Gaussian part sums to a N(drift T, sigma^2 T) draw; the jump part is exact
    resid = incr.increments.sum() - js.sizes.sum() - 0.7 * 10.0
    assert abs(resid) < 6 * 0.3 * np.sqrt(10.0)


def test_increment_sample_needs_data():
    with pytest.raises(ValueError):
        IncrementSample(1.0, [])
    with pytest.raises(ValueError):
        sample_increments(constant(1.0), 1.0, 0, RngStream(0))
