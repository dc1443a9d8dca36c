# app/utils/status.py
from typing import Iterable

# Canonical run statuses (use these strings across the app)
ALLOWED_STATUSES = [
    "pass",
    "fail",            # measurements outside acceptance
    "invalid",         # config rejected before the run started
    "solver_failure",  # non-contraction, blow-up, quadrature failure
]

EXIT_CODES = {
    "pass": 0,
    "fail": 1,
    "invalid": 2,
    "solver_failure": 3,
}

# worst-first ordering used when combining sub-results
_SEVERITY = {"pass": 0, "fail": 1, "solver_failure": 2, "invalid": 3}


def exit_code_for(status: str) -> int:
    if status not in EXIT_CODES:
        raise ValueError(f"unknown run status: {status}")
    return EXIT_CODES[status]


def combine_statuses(statuses: Iterable[str]) -> str:
    """Worst status wins; an empty collection counts as a pass."""
    worst = "pass"
    for s in statuses:
        if s not in _SEVERITY:
            raise ValueError(f"unknown run status: {s}")
        if _SEVERITY[s] > _SEVERITY[worst]:
            worst = s
    return worst
