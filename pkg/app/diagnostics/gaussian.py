# app/diagnostics/gaussian.py
"""
Closed forms for gaussians under heat flow, used as oracles.

A gaussian of mass m and variance v is m (2 pi v)^{-3/2} exp(-|x|^2 / 2v);
the heat semigroup maps variance v to v + 2t.
"""
import math

import numpy as np
from scipy.special import gamma


def heat_variance(variance: float, t: float) -> float:
    return variance + 2.0 * t


def gaussian_lp_norm(mass: float, variance: float, p: float) -> float:
    peak = abs(mass) * (2.0 * math.pi * variance) ** -1.5
    if np.isinf(p):
        return peak
    return peak * (2.0 * math.pi * variance / p) ** (1.5 / p)


def gaussian_weighted_l2(mass: float, variance: float, a: float) -> float:
    """|| |x|^a g ||_2 with ||.||_2^2 = m^2 (2 pi v)^{-3} 2 pi v^{a+3/2} Gamma(a + 3/2)."""
    sq = mass * mass * (2.0 * math.pi * variance) ** -3 * 2.0 * math.pi * variance ** (a + 1.5) * gamma(a + 1.5)
    return math.sqrt(sq)


def heat_flow_lp(mass: float, width: float, t: float, p: float) -> float:
    return gaussian_lp_norm(mass, heat_variance(width * width, t), p)


def heat_flow_weighted_l2(mass: float, width: float, t: float, a: float) -> float:
    return gaussian_weighted_l2(mass, heat_variance(width * width, t), a)
