"""Composite Gauss-Legendre rules on an interval with optional breakpoints."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(order)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def panel_edges(lo: float, hi: float, panels: int, breaks=()) -> np.ndarray:
    """Equal-width panel edges on [lo, hi] merged with interior breakpoints."""
    edges = np.linspace(lo, hi, panels + 1)
    if len(breaks):
        b = np.asarray(breaks, dtype=float)
        b = b[(b > lo) & (b < hi)]
        edges = np.unique(np.concatenate([edges, b]))
        # drop slivers from breaks that coincide with panel edges up to rounding
        tol = 1e-13 * (hi - lo)
        keep = np.diff(edges) > tol
        edges = np.concatenate([edges[:1], edges[1:][keep]])
        edges[-1] = hi
    return edges


def gauss_legendre(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite rule with ``order`` points per panel.

    Exact for polynomials of degree ``2 * order - 1`` on every panel.
    """
    if order < 2:
        raise ValueError(f"quadrature order must be >= 2, got {order}")
    t, w = _leggauss(order)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights
