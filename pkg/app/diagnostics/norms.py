# app/diagnostics/norms.py
"""
Discrete norms on the box, restricted to the ball |x| <= L/4.

Integrals are Riemann sums with the cell volume dx^3; sup-type norms are
maxima over grid points. The annulus L/8 < |x| <= L/4 is the wrap-guard
shell: a measurement carrying noticeable mass there (or its maximum, for
sup norms) is flagged "wrap-guard".
"""
import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Tuple, Union

import numpy as np

from app.spectral.fields import SpectralScalar, SpectralVector
from app.spectral.grid import Grid
from app.utils.errors import PreconditionError

logger = logging.getLogger(__name__)

QUANTITIES = ("u", "theta", "omega")
WRAP_FRACTION = 0.01
WRAP_FLAG = "wrap-guard"

Field = Union[SpectralScalar, SpectralVector]


class Measurement(NamedTuple):
    value: float
    flag: str = ""

    @property
    def trusted(self) -> bool:
        return self.flag != WRAP_FLAG


@dataclass(frozen=True)
class NormSpec:
    quantity: str
    a: float = 0.0
    b: int = 0
    p: float = 2.0

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise PreconditionError(f"quantity must be one of {QUANTITIES}, got {self.quantity!r}")
        if not self.a >= 0:
            raise PreconditionError(f"weight exponent a must be >= 0, got {self.a}")
        if int(self.b) != self.b or self.b < 0:
            raise PreconditionError(f"derivative order b must be a non-negative integer, got {self.b}")
        if not (self.p >= 2):
            raise PreconditionError(f"integrability p must lie in [2, inf], got {self.p}")

    def label(self) -> str:
        p = "inf" if np.isinf(self.p) else f"{self.p:g}"
        return f"{self.quantity}:a={self.a:g},b={self.b},p={p}"

    def as_dict(self):
        return {"quantity": self.quantity, "a": self.a, "b": self.b,
                "p": "inf" if np.isinf(self.p) else self.p}


@lru_cache(maxsize=16)
def _regions(grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    r = grid.radius
    inside = r <= grid.length / 4.0
    shell = inside & (r > grid.length / 8.0)
    inside.setflags(write=False)
    shell.setflags(write=False)
    return inside, shell


def restricted_region(grid: Grid) -> np.ndarray:
    """Boolean mask of |x| <= L/4."""
    return _regions(grid)[0]


def wrap_shell(grid: Grid) -> np.ndarray:
    return _regions(grid)[1]


def _components(field: Field) -> np.ndarray:
    c = field.coeffs
    return c[None] if isinstance(field, SpectralScalar) else c


def derivative_magnitude(field: Field, b: int) -> np.ndarray:
    """|grad^b field| in physical space: root sum of squares over components and index tuples."""
    grid = field.grid
    dxi = grid.dxi
    total = np.zeros(grid.shape)
    for comp in _components(field):
        for idx in itertools.product(range(3), repeat=b):
            mult = (1j ** b) * np.ones(grid.spectral_shape)
            for axis in idx:
                mult = mult * dxi[axis]
            total += grid.inverse(mult * comp) ** 2
    return np.sqrt(total)


def _measure(grid: Grid, density: np.ndarray, p: float, name: str) -> Measurement:
    inside, shell = _regions(grid)
    if np.isinf(p):
        masked = np.where(inside, density, -np.inf)
        i = np.unravel_index(int(np.argmax(masked)), masked.shape)
        value = float(density[i])
        flag = WRAP_FLAG if shell[i] and value > 0 else ""
    else:
        powered = density ** p
        total = float(np.sum(powered[inside]))
        outer = float(np.sum(powered[shell]))
        value = (total * grid.cell_volume) ** (1.0 / p)
        flag = WRAP_FLAG if total > 0 and outer >= WRAP_FRACTION * total else ""
    if flag:
        logger.warning("%s flagged %s (mass in L/8 < |x| <= L/4)", name, WRAP_FLAG)
    return Measurement(value, flag)


def weighted_norm(field: Field, spec: NormSpec) -> Measurement:
    """|| |x|^a |grad^b field| ||_p over |x| <= L/4."""
    grid = field.grid
    density = derivative_magnitude(field, int(spec.b))
    if spec.a:
        density = grid.radius ** spec.a * density
    return _measure(grid, density, spec.p, spec.label())


def lp_measurement(field: Field, p: float) -> Measurement:
    """Plain L^p norm over the restricted ball, any p >= 1."""
    if not p >= 1:
        raise PreconditionError(f"order p must lie in [1, inf], got {p}")
    return _measure(field.grid, derivative_magnitude(field, 0), p, f"L^{p:g}")


def lp_norm(field: Field, p: float) -> float:
    return lp_measurement(field, p).value


def _magnitude(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    if coeffs.ndim == 3:
        return np.abs(grid.inverse(coeffs))
    return np.sqrt(np.sum(grid.inverse(coeffs) ** 2, axis=0))


def x_norm_coeffs(grid: Grid, u: np.ndarray, t: float) -> Measurement:
    """sup (sqrt t + |x|) |u| for velocity coefficients at time t."""
    density = (np.sqrt(t) + grid.radius) * _magnitude(grid, u)
    return _measure(grid, density, np.inf, "X")


def y_norm_coeffs(grid: Grid, theta: np.ndarray, t: float) -> Measurement:
    """sup (sqrt t + |x|)^3 |theta| for temperature coefficients at time t."""
    density = (np.sqrt(t) + grid.radius) ** 3 * _magnitude(grid, theta)
    return _measure(grid, density, np.inf, "Y")


def scaling_invariant_norms(state) -> Tuple[Measurement, Measurement]:
    """(||u||_X, ||theta||_Y) at the state's time; take the max over a trajectory yourself."""
    grid = state.grid
    return x_norm_coeffs(grid, state.u.coeffs, state.t), y_norm_coeffs(grid, state.theta.coeffs, state.t)


MEMBERSHIP_SPACES = ("X", "Y", "X_a", "Y_b", "Xt_a", "Yt_b")


def membership_norm(state, space: str, exponent: float = 0.0) -> Measurement:
    """
    Pointwise-envelope norm of the weighted spaces at one time. With
    rho = |x| / sqrt(1+t), the X_a weight is (1+t)^{1/2} max(1, rho^a), Y_b uses
    (1+t)^{3/2} max(1, rho^b), and the tilde spaces raise the time powers to
    (1+t) and (1+t)^2.
    """
    grid = state.grid
    t = state.t
    if space == "X":
        return x_norm_coeffs(grid, state.u.coeffs, t)
    if space == "Y":
        return y_norm_coeffs(grid, state.theta.coeffs, t)
    if space not in MEMBERSHIP_SPACES:
        raise PreconditionError(f"unknown space {space!r}; expected one of {MEMBERSHIP_SPACES}")
    if not exponent > 0:
        raise PreconditionError(f"space {space} needs a positive weight exponent, got {exponent}")
    rho = grid.radius / np.sqrt(1.0 + t)
    envelope = np.maximum(1.0, rho ** exponent)
    time_power = {"X_a": 0.5, "Y_b": 1.5, "Xt_a": 1.0, "Yt_b": 2.0}[space]
    coeffs = state.u.coeffs if space.startswith("X") else state.theta.coeffs
    density = (1.0 + t) ** time_power * envelope * _magnitude(grid, coeffs)
    return _measure(grid, density, np.inf, f"{space}(exponent={exponent:g})")
