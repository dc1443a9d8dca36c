# app/diagnostics/moments.py
"""
Zeroth and first moments of the initial temperature.

Moments are Riemann sums over balls of radius L/16, L/8 and L/4. A moment is
trusted when the matching absolute moment (int |theta| for m0,
int |y| |theta| for m1) grows by less than NONCONVERGENT_GROWTH from one ball
to the next; the verdict uses the last doubling, L/8 to L/4.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from app.spectral.fields import SpectralScalar

logger = logging.getLogger(__name__)

NONCONVERGENT_GROWTH = 0.05
BALL_FRACTIONS = (1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0)


@dataclass
class Moments:
    m0: float
    m1: np.ndarray
    m0_converged: bool = True
    m1_converged: bool = True
    absolute_mass: float = 0.0
    growth: Dict[str, List[float]] = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.m0_converged and self.m1_converged

    def mass_is_zero(self, tol: float = 1e-8) -> bool:
        return abs(self.m0) <= tol * max(self.absolute_mass, np.finfo(float).tiny)

    def as_dict(self) -> Dict:
        return {"m0": self.m0, "m1": [float(v) for v in self.m1], "m0_converged": self.m0_converged,
                "m1_converged": self.m1_converged, "absolute_mass": self.absolute_mass, "growth": self.growth}


def _growth(values: List[float]) -> List[float]:
    out = []
    for lo, hi in zip(values, values[1:]):
        out.append((hi - lo) / lo if lo > 0 else (0.0 if hi == lo else np.inf))
    return out


def moments(theta0: SpectralScalar) -> Moments:
    grid = theta0.grid
    values = theta0.physical()
    r = grid.radius
    dv = grid.cell_volume
    x, y, z = np.broadcast_arrays(*grid.coords)

    m0s, m1s, abs0, abs1 = [], [], [], []
    for frac in BALL_FRACTIONS:
        ball = r <= frac * grid.length
        v = values[ball]
        m0s.append(float(np.sum(v)) * dv)
        m1s.append(np.array([np.sum(c[ball] * v) for c in (x, y, z)]) * dv)
        abs0.append(float(np.sum(np.abs(v))) * dv)
        abs1.append(float(np.sum(r[ball] * np.abs(v))) * dv)

    g0, g1 = _growth(abs0), _growth(abs1)
    ok0 = g0[-1] < NONCONVERGENT_GROWTH
    ok1 = g1[-1] < NONCONVERGENT_GROWTH
    if not ok0:
        logger.warning("zeroth moment does not converge (absolute mass growth %s)", ["%.3f" % g for g in g0])
    if not ok1:
        logger.warning("first moment does not converge (growth %s)", ["%.3f" % g for g in g1])
    return Moments(m0s[-1], m1s[-1], ok0, ok1, abs0[-1], {"m0": g0, "m1": g1})
