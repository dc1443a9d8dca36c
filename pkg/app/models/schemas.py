# app/models/schemas.py
import math
import re
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

EXPERIMENT_KINDS = (
    "linear-decay",
    "nonlinear-decay",
    "weighted-decay",
    "formula-equivalence",
    "scaling-invariance",
    "profile",
    "kernel-validation",
    "interpolation-check",
    "bilinear-bounds",
)

ExperimentKind = Literal[
    "linear-decay",
    "nonlinear-decay",
    "weighted-decay",
    "formula-equivalence",
    "scaling-invariance",
    "profile",
    "kernel-validation",
    "interpolation-check",
    "bilinear-bounds",
]

_PI_LENGTH = re.compile(r"^\s*([0-9]*\.?[0-9]*(?:[eE][-+]?[0-9]+)?)\s*\*?\s*pi\s*$")


def parse_length(v: Union[str, float, int]) -> float:
    """Box length as a number or a multiple of pi ("40pi", "40*pi", "pi")."""
    if isinstance(v, (int, float)):
        return float(v)
    s = str(v).strip().lower()
    m = _PI_LENGTH.match(s)
    if m:
        factor = m.group(1)
        return (float(factor) if factor else 1.0) * math.pi
    return float(s)


def _order(v: Union[str, float, int]) -> float:
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity", "oo"):
        return math.inf
    return float(v)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSpec(_Strict):
    n: int = Field(32, ge=4)
    length: float = 40.0

    @field_validator("length", mode="before")
    @classmethod
    def _length(cls, v):
        return parse_length(v)


class FieldSpec(_Strict):
    family: str = "gaussian"
    amplitude: float = Field(1.0, ge=0.0)
    width: float = Field(3.0, gt=0.0)


class InitialDataSpec(_Strict):
    velocity: FieldSpec = FieldSpec(family="zero", amplitude=0.0)
    temperature: FieldSpec = FieldSpec()


class SolverSpec(_Strict):
    method: Literal["picard", "timestep"] = "picard"
    formula: Literal["new_b4", "classical"] = "new_b4"
    nodes_per_panel: int = Field(6, ge=1)
    finest_panel: float = Field(0.02, gt=0.0)
    panel_subdivisions: int = Field(1, ge=1)
    tolerance: float = Field(1e-10, gt=0.0)
    max_iterations: int = Field(40, ge=1)
    nonlinear: bool = True
    buoyancy: bool = True
    dt: float = Field(0.01, gt=0.0)
    cfl: float = Field(0.5, gt=0.0)


class TimeGridSpec(_Strict):
    kind: Literal["geometric", "uniform"] = "geometric"
    t_first: float = Field(0.25, gt=0.0)
    t_max: float = Field(20.0, gt=0.0)
    count: int = Field(16, ge=2)

    def times(self) -> List[float]:
        if self.kind == "geometric":
            ts = np.geomspace(self.t_first, self.t_max, self.count)
        else:
            ts = np.linspace(self.t_first, self.t_max, self.count)
        return [float(t) for t in ts]


class NormSpecModel(_Strict):
    quantity: Literal["u", "theta", "omega"]
    a: float = 0.0
    b: int = 0
    p: float = 2.0

    @field_validator("p", mode="before")
    @classmethod
    def _p(cls, v):
        return _order(v)


class BoundSpecModel(_Strict):
    space: Literal["X", "Y", "X_a", "Y_b", "Xt_a", "Yt_b"]
    q: float
    exponent: float = 0.0

    @field_validator("q", mode="before")
    @classmethod
    def _q(cls, v):
        return _order(v)


class FitSpec(_Strict):
    slope_margin: float = Field(0.15, ge=0.0)
    slope_tolerance: float = Field(0.03, gt=0.0)
    min_r2: float = Field(0.98, ge=0.0, le=1.0)
    vorticity_gap: float = 0.35
    closed_form_tolerance: float = Field(1e-6, gt=0.0)
    shift_time: bool = True
    assumptions: Literal["auto", "canonical"] = "auto"


class ProfileSpec(_Strict):
    t: float = Field(4.0, gt=0.0)
    variants: List[Literal["R1", "R2", "R3", "Rt1", "Rt2"]] = ["R1"]
    kappas: List[float] = [2.0, 4.0, 8.0]
    min_decrease: float = Field(2.0, gt=0.0)
    compare_temperature: Optional[FieldSpec] = None
    min_contrast: float = Field(5.0, gt=0.0)


class EquivalenceSpec(_Strict):
    compare_time: float = Field(1.0, gt=0.0)
    min_shrink: float = Field(3.0, gt=0.0)
    cross_check: bool = True
    cross_tolerance: float = Field(1e-4, gt=0.0)


class ScalingSpec(_Strict):
    lam: float = 2.0
    times: List[float] = [0.25, 0.5]
    tolerance: float = Field(1e-3, gt=0.0)


class KernelSpec(_Strict):
    radii: List[float] = [2.0, 3.0, 4.0, 6.0, 8.0]
    agreement_tolerance: float = Field(1e-6, gt=0.0)
    agreement_range: Tuple[float, float] = (0.5, 8.0)
    directions: int = Field(8, ge=1)
    norm_times: List[float] = [1.0, 2.0, 4.0, 8.0]
    norm_orders: List[float] = [2.0, math.inf]
    kernels: List[Literal["G", "gradG", "K", "F"]] = ["G", "K"]
    alpha: float = 1.0

    @field_validator("norm_orders", mode="before")
    @classmethod
    def _orders(cls, v):
        return [_order(x) for x in v]


class InterpolationSpec(_Strict):
    alpha: float = 1.0
    p: float = 2.0
    family: Literal["radial", "grid"] = "radial"
    width: float = Field(1.0, gt=0.0)
    forcing_amplitude: float = Field(0.0, ge=0.0)
    times: List[float] = [1.0, 2.0, 4.0, 10.0]
    samples: int = Field(13, ge=3)

    @field_validator("p", mode="before")
    @classmethod
    def _p(cls, v):
        return _order(v)


class BilinearSpec(_Strict):
    amplitudes: List[float] = [1e-4, 1e-3]
    grid_sizes: List[int] = [16, 32]


class DiagnosticsSpec(_Strict):
    norms: List[NormSpecModel] = [
        NormSpecModel(quantity="theta", p=2.0),
        NormSpecModel(quantity="u", p=math.inf),
    ]
    bounds: List[BoundSpecModel] = []
    pressure: bool = False
    fit: FitSpec = FitSpec()
    profile: ProfileSpec = ProfileSpec()
    equivalence: EquivalenceSpec = EquivalenceSpec()
    scaling: ScalingSpec = ScalingSpec()
    kernel: KernelSpec = KernelSpec()
    interpolation: InterpolationSpec = InterpolationSpec()
    bilinear: BilinearSpec = BilinearSpec()


class ExperimentConfig(_Strict):
    kind: ExperimentKind = "linear-decay"
    seed: int = 0
    grid: GridSpec = GridSpec()
    initial_data: InitialDataSpec = InitialDataSpec()
    solver: SolverSpec = SolverSpec()
    time_grid: TimeGridSpec = TimeGridSpec()
    fit_window: Optional[Tuple[float, float]] = None
    diagnostics: DiagnosticsSpec = DiagnosticsSpec()
    output_dir: str = "runs/default"
    quadrature_tol: float = Field(1e-6, gt=0.0)
    plots: bool = True

    def window(self) -> Tuple[float, float]:
        """Fit window; defaults to [1, min(20, L^2/64)]."""
        if self.fit_window is not None:
            return (float(self.fit_window[0]), float(self.fit_window[1]))
        return (1.0, min(20.0, self.grid.length ** 2 / 64.0))
