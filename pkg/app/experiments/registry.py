# app/experiments/registry.py
from typing import Any, Callable, Dict, NamedTuple

from app.experiments.bilinear import run_bilinear_bounds
from app.experiments.decay import run_linear_decay, run_nonlinear_decay, run_weighted_decay
from app.experiments.equivalence import run_formula_equivalence
from app.experiments.interpolation import run_interpolation_check
from app.experiments.kernels import run_kernel_validation
from app.experiments.profile import run_profile
from app.experiments.scaling import run_scaling_invariance
from app.models.schemas import EXPERIMENT_KINDS, ExperimentConfig


class Experiment(NamedTuple):
    runner: Callable[[ExperimentConfig], Dict[str, Any]]
    description: str


EXPERIMENTS: Dict[str, Experiment] = {
    "linear-decay": Experiment(run_linear_decay, "heat flow of a gaussian temperature against its closed form"),
    "nonlinear-decay": Experiment(run_nonlinear_decay, "small-data run, fitted decay exponents of configured norms"),
    "weighted-decay": Experiment(run_weighted_decay, "weighted (a, b, p) exponent table and vorticity gap"),
    "formula-equivalence": Experiment(run_formula_equivalence, "two Picard formulas and the time-stepper agree"),
    "scaling-invariance": Experiment(run_scaling_invariance, "lambda-scaled run reproduces the rescaled solution"),
    "profile": Experiment(run_profile, "far-field profile residuals over kappa"),
    "kernel-validation": Experiment(run_kernel_validation, "Oseen kernel decomposition and kernel L^p rates"),
    "interpolation-check": Experiment(run_interpolation_check, "fractional interpolation constant stability"),
    "bilinear-bounds": Experiment(run_bilinear_bounds, "observed bilinear constants across a data sweep"),
}

assert tuple(EXPERIMENTS) == EXPERIMENT_KINDS
