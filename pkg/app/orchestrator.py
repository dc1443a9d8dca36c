# app/orchestrator.py
"""
Run pipeline: validate the config, dispatch to the experiment runner, write
the run directory and map failures to run statuses.

Run directory layout:
  measurements.csv       t,quantity,a,b,p,value,flag
  report.json            experiment envelope without the measurement rows
  fits.json              fit reports {spec, window, slope, r2, predicted, pass, anchor}
  manifest.json          config hash, versions, wall time, status, exit code
  plot_measurements.py   optional, matplotlib script over measurements.csv
  last_good/             checkpoint of the last finite state after a blow-up
"""
import logging
import os
import platform
import time
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

import numpy as np
import pydantic
import scipy
import yaml

from app.config import PACKAGE_VERSION
from app.experiments._common import ensure_report
from app.experiments.registry import EXPERIMENTS
from app.experiments.validation import load_config, validate
from app.models.schemas import ExperimentConfig
from app.solver.state import Trajectory, config_hash
from app.storage.checkpoint import save_trajectory
from app.storage.measurements import write_json, write_measurements
from app.utils.errors import (
    ConfigError,
    NonIntegrableError,
    PreconditionError,
    QuadratureError,
    SolverBlowupError,
    SolverError,
)
from app.utils.status import exit_code_for

logger = logging.getLogger(__name__)

PLOT_SCRIPT = '''#!/usr/bin/env python3
"""Log-log plots of measurements.csv, one panel per (quantity, a, b, p)."""
import csv
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    series = defaultdict(list)
    with open(os.path.join(HERE, "measurements.csv"), newline="") as fh:
        for row in csv.DictReader(fh):
            value = float(row["value"])
            if value > 0:
                key = (row["quantity"], row["a"], row["b"], row["p"])
                series[key].append((float(row["t"]), value))
    if not series:
        print("no positive measurements to plot")
        return
    fig, ax = plt.subplots(figsize=(7, 5))
    for (q, a, b, p), pts in sorted(series.items()):
        pts.sort()
        ax.loglog([t for t, _ in pts], [v for _, v in pts], marker="o", label=f"{q} a={a} b={b} p={p}")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.set_title(EXPERIMENT)
    ax.legend(fontsize="small")
    out = os.path.join(HERE, "measurements.png")
    fig.savefig(out, dpi=120, bbox_inches="tight")
    print("wrote", out)


EXPERIMENT = {experiment!r}

if __name__ == "__main__":
    main()
'''


def versions() -> Dict[str, str]:
    return {
        "package": PACKAGE_VERSION,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
        "pyyaml": yaml.__version__,
    }


def _invalid(kind: str, issues: List[Dict[str, Any]]) -> Dict[str, Any]:
    resp = ensure_report(kind, {
        "status": "invalid",
        "errors": [f"{i['code']} ({i['field']}): {i['message']}" for i in issues],
        "result": {"violations": issues},
    })
    resp["exit_code"] = exit_code_for("invalid")
    return resp


def _write_plot_script(out_dir: str, experiment: str) -> str:
    path = os.path.join(out_dir, "plot_measurements.py")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(PLOT_SCRIPT.replace("{experiment!r}", repr(experiment)))
    return path


def _save_last_good(out_dir: str, err: SolverBlowupError) -> Optional[str]:
    state = err.last_good_state
    if state is None:
        return None
    return save_trajectory(os.path.join(out_dir, "last_good"), Trajectory([state], {"reason": str(err)}))


def run_config(config: ExperimentConfig, output_dir: Optional[str] = None) -> Dict[str, Any]:
    """Run one experiment; the returned envelope carries status, exit_code and output_dir."""
    issues = validate(config)
    if issues:
        logger.error("config rejected with %d violation(s)", len(issues))
        return _invalid(config.kind, issues)

    out_dir = output_dir or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    chash = config_hash(config.model_dump())
    logger.info("run %s (config %s) into %s", config.kind, chash, out_dir)

    try:
        report = EXPERIMENTS[config.kind].runner(config)
    except ConfigError as e:
        logger.exception("experiment %s rejected its inputs", config.kind)
        report = ensure_report(config.kind, {"status": "invalid", "errors": [str(e)]})
    except PreconditionError as e:
        # the config already validated, so a violated precondition is a computation fault
        logger.exception("precondition violated during %s", config.kind)
        report = ensure_report(config.kind, {"status": "solver_failure", "errors": [str(e)]})
    except SolverBlowupError as e:
        logger.exception("solver blew up in %s", config.kind)
        saved = _save_last_good(out_dir, e)
        report = ensure_report(config.kind, {"status": "solver_failure", "errors": [str(e)],
                                             "result": {"last_good_checkpoint": saved}})
    except (SolverError, QuadratureError, NonIntegrableError) as e:
        logger.exception("solver failure in %s", config.kind)
        report = ensure_report(config.kind, {"status": "solver_failure", "errors": [str(e)]})
    except Exception as e:
        logger.exception("unexpected failure in %s", config.kind)
        report = ensure_report(config.kind, {"status": "solver_failure",
                                             "errors": [f"{type(e).__name__}: {e}"]})

    wall = time.perf_counter() - t0
    status = report["status"]
    code = exit_code_for(status)
    result = report.get("result", {})
    rows = result.pop("measurements", [])
    fits = result.get("fits", [])

    write_measurements(os.path.join(out_dir, "measurements.csv"), rows)
    write_json(os.path.join(out_dir, "fits.json"), {"experiment": config.kind, "fits": fits})
    write_json(os.path.join(out_dir, "report.json"), report)
    manifest = {
        "experiment": config.kind,
        "config_hash": chash,
        "config": config.model_dump(),
        "seed": config.seed,
        "versions": versions(),
        "started_at": started,
        "wall_time_s": wall,
        "status": status,
        "exit_code": code,
    }
    write_json(os.path.join(out_dir, "manifest.json"), manifest)
    if config.plots and rows:
        _write_plot_script(out_dir, config.kind)

    logger.info("run %s finished: status=%s exit=%d wall=%.2fs", config.kind, status, code, wall)
    report["exit_code"] = code
    report["output_dir"] = out_dir
    return report


def run(config_path: str, output_dir: Optional[str] = None) -> Dict[str, Any]:
    config, issues = load_config(config_path)
    if config is None or issues:
        kind = config.kind if config is not None else "unknown"
        logger.error("config %s rejected with %d violation(s)", config_path, len(issues))
        return _invalid(kind, issues)
    return run_config(config, output_dir)
