import math

import numpy as np
import pytest

from levy_sieve.bases import (
    DegreeTooHighError,
    ModelCollection,
    build_model,
    cached_model,
    collection_constants,
    eval_basis,
    sum_squares_sup,
)
from levy_sieve.model import ReferenceMeasure, constant
from levy_sieve.quadrature import gauss_legendre, panel_edges

MEASURES = [ReferenceMeasure.lebesgue(0.0, 1.0), ReferenceMeasure.inverse_square(1.0, 2.0)]


def gram(lm):
    # independent rule: many more panels and a higher order than the builder uses
    nodes, w = gauss_legendre(panel_edges(lm.measure.lo, lm.measure.hi, 4 * lm.m * 8), 16)
    w = w * lm.measure.weight(nodes)
    phi = np.stack([eval_basis(lm, i, nodes) for i in range(lm.dim)])
    return phi @ (w[:, None] * phi.T)


def test_indicator_basis_values(unit):
    lm = build_model(0, 4, unit)
    assert lm.d_m == 4 and lm.D_m == pytest.approx(4.0, rel=1e-12)
    assert eval_basis(lm, 0, 0.1) == pytest.approx(2.0)
    assert eval_basis(lm, 3, 1.0) == pytest.approx(2.0)


def test_linear_single_cell_attains_bound(unit):
    lm = build_model(1, 1, unit)
    assert lm.d_m == 2
    assert lm.D_m == pytest.approx(4.0, rel=1e-9)


def test_half_open_cells(unit):
    lm = build_model(0, 2, unit)
    assert eval_basis(lm, 0, 0.25) == pytest.approx(math.sqrt(2.0))
    assert eval_basis(lm, 0, 0.75) == 0.0
    assert eval_basis(lm, 0, 0.5) == pytest.approx(math.sqrt(2.0))
    assert eval_basis(lm, 1, 0.5) == 0.0
    assert eval_basis(lm, 0, 0.0) == pytest.approx(math.sqrt(2.0))


def test_eval_basis_domain_and_index(unit):
    lm = build_model(0, 2, unit)
    with pytest.raises(ValueError):
        eval_basis(lm, 0, 1.5)
    with pytest.raises(IndexError):
        eval_basis(lm, 2, 0.5)


@pytest.mark.parametrize("k,m,expected", [(0, 8, 8.0), (0, 1, 1.0)])
def test_sum_squares_sup_indicators(unit, k, m, expected):
    assert sum_squares_sup(build_model(k, m, unit)) == pytest.approx(expected, rel=1e-12)


def test_sum_squares_sup_linear_bound(unit):
    assert sum_squares_sup(build_model(1, 2, unit)) <= 8.0 * (1 + 1e-9)


@pytest.mark.parametrize("meas", MEASURES, ids=lambda m: m.kind)
@pytest.mark.parametrize("k", range(6))
@pytest.mark.parametrize("m", [1, 3, 16, 64])
def test_orthonormal_dimension_and_sup(meas, k, m):
    lm = cached_model(k, m, meas)
    assert lm.d_m == m * (k + 1)
    assert np.max(np.abs(gram(lm) - np.eye(lm.dim))) <= 1e-10
    if meas.kind == "lebesgue":
        assert lm.D_m <= (k + 1) ** 2 * m / meas.width * (1 + 1e-9)


def test_degree_limit(unit):
    with pytest.raises(DegreeTooHighError):
        build_model(6, 1, unit)
    with pytest.raises(ValueError):
        build_model(0, 0, unit)


def test_singular_gram_is_reported():
    # weight concentrated near one end makes the local monomials nearly collinear
    meas = ReferenceMeasure.custom(0.0, 1.0, [0.0, 0.999, 1.0], [1e-300, 1e-300, 1.0])
    with pytest.raises(DegreeTooHighError):
        build_model(5, 1, meas)


@pytest.mark.parametrize("k", [1, 3])
def test_sumsq_matches_basis(unit, k):
    lm = build_model(k, 5, unit)
    x = np.random.default_rng(0).uniform(0, 1, 1000)
    direct = sum(eval_basis(lm, i, x) ** 2 for i in range(lm.dim))
    assert np.max(np.abs(lm.sumsq(x) - direct)) <= 1e-10


def test_constant_reconstruction(unit):
    for m in (1, 7, 32):
        lm = build_model(0, m, unit)
        coef = np.full(m, 1.0 / math.sqrt(m))  # <1, phi_i> = 1/sqrt(m)
        x = np.linspace(0, 1, 101)
        assert np.max(np.abs(lm.evaluate(coef, x) - 1.0)) <= 1e-10


def test_collection_constants_constant_density(unit):
    coll = ModelCollection(0, unit, 16)
    cc = collection_constants(coll, constant(10.0))
    assert cc.beta == pytest.approx(10.0, rel=1e-10)
    assert cc.phi_inf == pytest.approx(1.0, rel=1e-10)
    assert collection_constants(coll, constant(20.0)).beta == pytest.approx(2 * cc.beta, rel=1e-12)


def test_collection_one_model_per_dimension(unit):
    coll = ModelCollection(2, unit, 64)
    dims = [lm.d_m for lm in coll.models]
    assert len(set(dims)) == len(dims) == 64
    assert coll.gamma == 1.0 and coll.R == 0.0
    assert [lm.m for lm in coll.admissible(10.0)] == list(range(1, 2))  # D_m = 9 m
