# app/kernels/quadrature.py
"""
Composite Gauss-Legendre rules shared by the radial Fourier integrals, the
radial L^p norms and the Duhamel time quadrature.
"""
import logging
from functools import lru_cache
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy.special import roots_legendre

from app.utils.errors import QuadratureError

logger = logging.getLogger(__name__)

# e^{-t Xi^{2 alpha}} at the radial cutoff
FOURIER_TAIL = 1e-16
NODES_PER_PANEL = 16


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]; cached read-only arrays."""
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_rule(edges: Sequence[float], n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of an n-point rule on every panel [edges[i], edges[i+1]]."""
    e = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(n)
    lo, hi = e[:-1, None], e[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def fourier_cutoff(t: float, alpha: float = 1.0) -> float:
    """Radial wavenumber beyond which e^{-t rho^{2 alpha}} < FOURIER_TAIL."""
    return (np.log(1.0 / FOURIER_TAIL) / t) ** (1.0 / (2.0 * alpha))


def _panel_edges(upper: float, panels: int, grade_levels: int) -> np.ndarray:
    edges = np.linspace(0.0, upper, panels + 1)
    if grade_levels <= 0:
        return edges
    first = edges[1]
    graded = first * 2.0 ** -np.arange(grade_levels, 0, -1)
    return np.concatenate([[0.0], graded, edges[1:]])


def radial_integral(integrand: Callable[[np.ndarray], np.ndarray], upper: float, *,
                    tol: float = 1e-13, panels: int = 8, grade_levels: int = 0,
                    max_refinements: int = 10, n: int = NODES_PER_PANEL) -> Tuple[np.ndarray, float]:
    """
    Integrate integrand(rho) over [0, upper] by composite Gauss-Legendre.

    integrand receives a 1-D array of nodes and returns an array whose first
    axis runs over the nodes; the result keeps the remaining axes. Panels are
    doubled until two successive sums agree to tol relative to the largest
    entry. grade_levels > 0 adds ratio-2 panels toward rho = 0 for integrands
    that are only Hoelder there (e^{-t rho^{2 alpha}} with alpha != 1).

    Returns (value, error_estimate); raises QuadratureError when refinement
    is exhausted.
    """
    previous = None
    estimate = np.inf
    for _ in range(max_refinements):
        nodes, weights = composite_rule(_panel_edges(upper, panels, grade_levels), n)
        vals = np.asarray(integrand(nodes))
        current = np.tensordot(weights, vals, axes=(0, 0))
        if previous is not None:
            scale = max(float(np.max(np.abs(current))), np.finfo(float).tiny)
            estimate = float(np.max(np.abs(current - previous)))
            if estimate <= tol * scale or estimate == 0.0:
                return current, estimate
        previous = current
        panels *= 2
        grade_levels = grade_levels + 1 if grade_levels else 0
    raise QuadratureError("radial quadrature did not converge", estimate)
