import numpy as np
import pytest

from levy_sieve.quadrature import gauss_legendre, panel_edges


def test_panel_edges_inserts_breaks_and_keeps_endpoints():
    e = panel_edges(0.0, 1.0, 4, (0.3, 0.5, 2.0))
    assert e[0] == 0.0 and e[-1] == 1.0
    assert 0.3 in e and np.count_nonzero(e == 0.5) == 1
    assert np.all(np.diff(e) > 0)


def test_polynomial_exactness():
    nodes, w = gauss_legendre(panel_edges(-1.0, 2.0, 3), 5)
    for deg in range(10):
        exact = (2.0 ** (deg + 1) - (-1.0) ** (deg + 1)) / (deg + 1)
        assert np.dot(w, nodes ** deg) == pytest.approx(exact, rel=1e-13, abs=1e-13)


def test_order_must_be_at_least_two():
    with pytest.raises(ValueError):
        gauss_legendre(np.array([0.0, 1.0]), 1)
