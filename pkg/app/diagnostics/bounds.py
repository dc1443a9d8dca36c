# app/diagnostics/bounds.py
"""
L^q bounds implied by membership in the scaling-invariant and weighted spaces,
and the pressure-gradient bound.

For a space S with membership norm M the bound reads ||q(s)||_q <= C M w(s),
with w(s) = s^r for X, Y and w(s) = (1+s)^r for the weighted spaces:

    X     r = -1/2 + 3/(2q)   3 < q <= inf
    Y     r = -3/2 + 3/(2q)   1 < q <= inf
    X_a   r = -1/2 + 3/(2q)   q > 3/a
    Y_b   r = -3/2 + 3/(2q)   q > 3/b
    Xt_a  r = -1 + 3/(2q)     q > 3/a
    Yt_b  r = -2 + 3/(2q)     q > 3/b

The check samples C_obs(s) = ||q(s)||_q / (M w(s)) over the trajectory nodes
and passes when every sample is finite and max/median <= 10.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List

from app.diagnostics.fitting import bound_stability
from app.diagnostics.norms import MEMBERSHIP_SPACES, lp_measurement, lp_norm, membership_norm
from app.solver.state import Trajectory
from app.spectral.fields import SpectralVector
from app.spectral.operators import nonlinear_coeffs, recover_pressure_gradient
from app.utils.errors import PreconditionError

logger = logging.getLogger(__name__)


def _inv(q: float) -> float:
    return 0.0 if math.isinf(q) else 1.0 / q


def bound_rate(space: str, q: float, exponent: float = 0.0) -> float:
    """Rate r of the space's L^q bound; rejects q outside the admissible range."""
    if space not in MEMBERSHIP_SPACES:
        raise PreconditionError(f"unknown space {space!r}; expected one of {MEMBERSHIP_SPACES}")
    iq = _inv(q)
    if space == "X":
        if not q > 3:
            raise PreconditionError(f"order q={q:g} outside 3 < q <= inf for X")
        return -0.5 + 1.5 * iq
    if space == "Y":
        if not q > 1:
            raise PreconditionError(f"order q={q:g} outside 1 < q <= inf for Y")
        return -1.5 + 1.5 * iq
    if not exponent > 0:
        raise PreconditionError(f"space {space} needs a positive weight exponent")
    if not q > 3.0 / exponent:
        raise PreconditionError(f"order q={q:g} must exceed 3/{exponent:g} for {space}")
    return {"X_a": -0.5, "Y_b": -1.5, "Xt_a": -1.0, "Yt_b": -2.0}[space] + 1.5 * iq


@dataclass
class LpBoundReport:
    space: str
    q: float
    exponent: float
    rate: float
    membership: float
    times: List[float] = field(default_factory=list)
    ratios: List[float] = field(default_factory=list)
    max_ratio: float = 0.0
    spread: float = 0.0
    passed: bool = False
    flag: str = ""

    def as_dict(self) -> Dict:
        return {"space": self.space, "q": self.q, "exponent": self.exponent, "rate": self.rate,
                "membership": self.membership, "times": self.times, "ratios": self.ratios,
                "max_ratio": self.max_ratio, "spread": self.spread, "pass": self.passed, "flag": self.flag}


def lp_bound_check(trajectory: Trajectory, space: str, q: float, exponent: float = 0.0) -> LpBoundReport:
    rate = bound_rate(space, q, exponent)
    states = [st for st in trajectory.states if st.t > 0]
    if not states:
        raise PreconditionError("L^q bound check needs trajectory nodes with t > 0")
    member = max(membership_norm(st, space, exponent).value for st in states)
    velocity = space.startswith("X")
    flags = set()
    times, ratios = [], []
    for st in states:
        fld = st.u if velocity else st.theta
        m = lp_measurement(fld, q)
        value = m.value
        if m.flag:
            flags.add(m.flag)
        weight = st.t ** rate if space in ("X", "Y") else (1.0 + st.t) ** rate
        den = member * weight
        ratios.append(value / den if den > 0 else (0.0 if value == 0 else math.inf))
        times.append(st.t)
    stab = bound_stability(ratios)
    report = LpBoundReport(space, q, exponent, rate, member, times, ratios, stab.maximum, stab.ratio,
                           stab.stable and math.isfinite(member), ",".join(sorted(flags)))
    logger.info("L^%g bound for %s: max ratio %.3e spread %.2f pass=%s", q, space, report.max_ratio,
                report.spread, report.passed)
    return report


@dataclass
class PressureBound:
    p: float
    grad_pressure: float
    rhs: float
    ratio: float


def pressure_bound_check(state, p: float = 2.0) -> PressureBound:
    """||grad P||_p against ||u . grad u||_p + ||theta||_p at one state."""
    grid = state.grid
    gp = recover_pressure_gradient(state)
    f, _ = nonlinear_coeffs(grid, state.u.coeffs, state.theta.coeffs, need_momentum=True)
    # u . grad u = -f for divergence-free u
    adv = SpectralVector(grid, -f)
    lhs = lp_norm(gp, p)
    rhs = lp_norm(adv, p) + lp_norm(state.theta, p)
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    logger.debug("pressure bound at t=%g: %.3e / %.3e", state.t, lhs, rhs)
    return PressureBound(p, lhs, rhs, ratio)
