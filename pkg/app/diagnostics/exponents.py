# app/diagnostics/exponents.py
"""
Predicted decay exponents of || |x|^a grad^b q(t) ||_p as exact fractions.

    u:     -gamma       + a/2 - b/2 - (3/4)(1 - 2/p)
    theta: -mu          + a/2 - b/2 - (3/4)(1 - 2/p)
    omega: -gamma - 1/2 + a/2 - b/2 - (3/4)(1 - 2/p)

valid for 0 <= a < b + 5/2 on the velocity. The weight range a < 5/2 with
b = 0 is the directly established one; anything else on u is tagged
"extended-range".
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from app.diagnostics.norms import NormSpec
from app.utils.errors import PreconditionError

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction]

EXTENDED_RANGE = "extended-range"
EXTENDED_HYPOTHESIS = "extended-hypothesis"


def as_fraction(x: Number) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x).limit_denominator(1000)


@dataclass(frozen=True)
class DecayAssumptions:
    gamma: Fraction = Fraction(1, 4)
    mu: Fraction = Fraction(5, 4)
    coupled: bool = True
    flag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gamma", as_fraction(self.gamma))
        object.__setattr__(self, "mu", as_fraction(self.mu))
        if self.coupled and self.mu != self.gamma + 1:
            raise PreconditionError(f"coupled assumptions need mu = gamma + 1, got gamma={self.gamma}, mu={self.mu}")


CANONICAL = DecayAssumptions()
# data with nonzero total buoyancy: the velocity grows like t^{1/4} in L^2
NONZERO_MASS = DecayAssumptions(Fraction(-1, 4), Fraction(3, 4), flag=EXTENDED_HYPOTHESIS)


def assumptions_for_mass(m0: float, scale: float = 1.0, tol: float = 1e-8) -> DecayAssumptions:
    """Canonical rates for zero-mean temperature, the growth-regime rates otherwise."""
    if abs(m0) <= tol * max(scale, np.finfo(float).tiny):
        return CANONICAL
    logger.info("nonzero temperature mass %.3e: using %s decay assumptions", m0, EXTENDED_HYPOTHESIS)
    return NONZERO_MASS


def _lp_term(p: float) -> Fraction:
    """(3/4)(1 - 2/p)."""
    if np.isinf(p):
        return Fraction(3, 4)
    return Fraction(3, 4) * (1 - Fraction(2) / as_fraction(p))


def range_flag(spec: NormSpec) -> str:
    if spec.quantity == "u" and not (as_fraction(spec.a) < Fraction(5, 2) and spec.b == 0):
        return EXTENDED_RANGE
    return ""


def predicted_exponent(spec: NormSpec, assumptions: DecayAssumptions = CANONICAL) -> Fraction:
    a = as_fraction(spec.a)
    b = Fraction(int(spec.b))
    if spec.quantity == "u" and not a < b + Fraction(5, 2):
        raise PreconditionError(f"velocity weight violates a < b + 5/2 (a={a}, b={b})")
    common = a / 2 - b / 2 - _lp_term(spec.p)
    if range_flag(spec):
        logger.warning("%s lies outside a < 5/2, b = 0: %s", spec.label(), EXTENDED_RANGE)
    if spec.quantity == "u":
        return -assumptions.gamma + common
    if spec.quantity == "theta":
        return -assumptions.mu + common
    return -assumptions.gamma - Fraction(1, 2) + common
