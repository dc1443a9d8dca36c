# app/utils/errors.py
from typing import Any, Dict, List, Optional


class BoussinesqError(Exception):
    """Base class for every failure raised by the package."""


class ConfigError(BoussinesqError, ValueError):
    """Experiment configuration is invalid; carries the violations list."""

    def __init__(self, violations: List[Dict[str, Any]]):
        self.violations = list(violations)
        msg = "; ".join(f"{v.get('code')}: {v.get('message')}" for v in self.violations) or "invalid config"
        super().__init__(msg)


class PreconditionError(BoussinesqError, ValueError):
    """A documented precondition on the arguments does not hold."""


class QuadratureError(BoussinesqError, RuntimeError):
    def __init__(self, message: str, estimate: float):
        self.estimate = float(estimate)
        super().__init__(f"{message} (achieved error estimate {self.estimate:.3e})")


class NonIntegrableError(BoussinesqError, RuntimeError):
    def __init__(self, message: str, history: Optional[List[float]] = None):
        self.history = list(history or [])
        super().__init__(message)


class SolverError(BoussinesqError, RuntimeError):
    """Any failure of a solver run (maps to exit code 3)."""


class NonContractionError(SolverError):
    def __init__(self, message: str, differences: List[float]):
        self.differences = list(differences)
        super().__init__(message)


class ConvergenceError(SolverError):
    def __init__(self, message: str, differences: List[float]):
        self.differences = list(differences)
        super().__init__(message)


class SolverBlowupError(SolverError):
    def __init__(self, message: str, last_good_state: Any = None):
        self.last_good_state = last_good_state
        super().__init__(message)


class InsufficientCoverageError(SolverError, ValueError):
    pass


class ResolutionError(SolverError, ValueError):
    pass
