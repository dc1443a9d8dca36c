# app/experiments/interpolation.py
from typing import Any, Dict

from app.diagnostics.interpolation import grid_flow_family, interpolation_check, radial_flow_family
from app.experiments._common import check, finish, make_grid, temperature_data
from app.models.schemas import ExperimentConfig, FieldSpec


def run_interpolation_check(config: ExperimentConfig) -> Dict[str, Any]:
    spec = config.diagnostics.interpolation
    if spec.family == "radial":
        flow = radial_flow_family(spec.alpha, spec.width)
    else:
        grid = make_grid(config)
        u0 = temperature_data(grid, FieldSpec(family="gaussian", amplitude=1.0, width=spec.width))
        forcing = None
        if spec.forcing_amplitude > 0:
            forcing = temperature_data(grid, FieldSpec(family="gaussian", amplitude=spec.forcing_amplitude,
                                                       width=2.0 * spec.width))
        flow = grid_flow_family(grid, spec.alpha, u0, forcing)
    report = interpolation_check(spec.alpha, spec.p, flow, spec.times, spec.samples)
    anchor = "claim:interpolation-inequality"
    checks = [check("interpolation-constant-stable", report.max_ratio, report.spread, report.passed, anchor)]
    return finish(config.kind, anchor, checks, family=spec.family, interpolation=report.as_dict())
