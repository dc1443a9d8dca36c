# app/diagnostics/fitting.py
"""Power-law fits in log-log coordinates and the max/median stability criterion."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from app.utils.errors import PreconditionError

logger = logging.getLogger(__name__)

# fit windows must span at least half a decade in t
MIN_WINDOW_RATIO = math.sqrt(10.0)
STABILITY_LIMIT = 10.0


@dataclass
class DecaySeries:
    label: str
    times: List[float]
    values: List[float]

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise PreconditionError(f"{self.label}: {len(self.times)} times but {len(self.values)} values")
        self.times = [float(t) for t in self.times]
        self.values = [float(v) for v in self.values]
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise PreconditionError(f"{self.label}: times must be strictly increasing")

    def windowed(self, window: Tuple[float, float]) -> Tuple[np.ndarray, np.ndarray]:
        t1, t2 = window
        t = np.asarray(self.times)
        v = np.asarray(self.values)
        eps = 1e-12 * max(abs(t1), abs(t2), 1.0)
        keep = (t >= t1 - eps) & (t <= t2 + eps)
        return t[keep], v[keep]


@dataclass
class ExponentFit:
    label: str
    slope: float
    intercept: float
    r2: float
    window: Tuple[float, float]
    points: int
    stderr: float = 0.0

    def as_dict(self) -> Dict:
        return {"label": self.label, "slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "window": list(self.window), "points": self.points, "stderr": self.stderr}


def fit_decay_exponent(series: DecaySeries, window: Optional[Tuple[float, float]] = None,
                       shift: float = 0.0) -> ExponentFit:
    """
    Least-squares slope of log(value) against log(t + shift) over the window.

    The window is given in unshifted times; shift moves the time origin, e.g.
    to sigma^2/2 for a gaussian of width sigma so it becomes a heat kernel.
    """
    if window is None:
        window = (series.times[0], series.times[-1])
    t1, t2 = float(window[0]), float(window[1])
    if not (0 < t1 < t2):
        raise PreconditionError(f"{series.label}: fit window must satisfy 0 < t1 < t2, got {window}")
    if t2 / t1 < MIN_WINDOW_RATIO * (1.0 - 1e-12):
        raise PreconditionError(f"{series.label}: fit window [{t1:g}, {t2:g}] spans less than half a decade")
    t, v = series.windowed((t1, t2))
    if t.size < 2:
        raise PreconditionError(f"{series.label}: fewer than two samples inside [{t1:g}, {t2:g}]")
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise PreconditionError(f"{series.label}: log-log fit needs positive finite values")
    if not shift >= 0:
        raise PreconditionError(f"{series.label}: time shift must be >= 0, got {shift}")
    x, y = np.log(t + shift), np.log(v)
    res = stats.linregress(x, y)
    resid = y - (res.intercept + res.slope * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    fit = ExponentFit(series.label, float(res.slope), float(res.intercept), r2, (t1, t2), int(t.size),
                      float(res.stderr) if np.isfinite(res.stderr) else 0.0)
    logger.debug("fit %s over [%g, %g]: slope=%.4f r2=%.5f", series.label, t1, t2, fit.slope, fit.r2)
    return fit


@dataclass
class Stability:
    maximum: float
    median: float
    ratio: float
    stable: bool
    samples: List[float] = field(default_factory=list)


def bound_stability(samples: Sequence[float], limit: float = STABILITY_LIMIT) -> Stability:
    """A sampled 'constant' counts as bounded when finite and max/median <= limit."""
    vals = [float(s) for s in samples]
    if not vals:
        raise PreconditionError("stability check needs at least one sample")
    if not all(math.isfinite(s) for s in vals):
        return Stability(math.inf, math.nan, math.inf, False, vals)
    arr = np.abs(np.asarray(vals))
    mx, med = float(arr.max()), float(np.median(arr))
    if med > 0:
        ratio = mx / med
    else:
        ratio = 0.0 if mx == 0 else math.inf
    return Stability(mx, med, ratio, ratio <= limit, vals)
