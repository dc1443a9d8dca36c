#!/usr/bin/env python3
"""
scripts/run_suite.py

Run every YAML experiment config in a directory and print a status table.
Each run writes into <output-root>/<config name>/ so runs never share a directory.

Usage:
  python scripts/run_suite.py                      # configs/ into runs/
  python scripts/run_suite.py --configs configs --output-root /tmp/runs
  python scripts/run_suite.py --only linear-decay --only profile
  python scripts/run_suite.py --validate-only
"""

import argparse
import glob
import logging
import os
import sys

# add project root to path so we can import app.* modules
ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

from app.experiments.validation import load_config
from app.orchestrator import run_config
from app.utils.status import combine_statuses, exit_code_for


def _configs(directory: str):
    return sorted(glob.glob(os.path.join(directory, "*.yaml")) + glob.glob(os.path.join(directory, "*.yml")))


def run_suite(configs_dir: str, output_root: str, only=None, validate_only: bool = False) -> int:
    rows = []
    for path in _configs(configs_dir):
        name = os.path.splitext(os.path.basename(path))[0]
        config, issues = load_config(path)
        if config is not None and only and config.kind not in only:
            continue
        if config is None or issues:
            rows.append((name, config.kind if config else "?", "invalid", "; ".join(i["code"] for i in issues)))
            continue
        if validate_only:
            rows.append((name, config.kind, "pass", "valid"))
            continue
        report = run_config(config, os.path.join(output_root, name))
        rows.append((name, config.kind, report["status"], "; ".join(report.get("errors", [])[:3])))

    if not rows:
        print(f"no configs found in {configs_dir}")
        return 0
    w0 = max(len(r[0]) for r in rows)
    w1 = max(len(r[1]) for r in rows)
    print(f"{'config'.ljust(w0)}  {'kind'.ljust(w1)}  {'status':<14}  notes")
    for name, kind, status, notes in rows:
        print(f"{name.ljust(w0)}  {kind.ljust(w1)}  {status:<14}  {notes}")
    overall = combine_statuses(r[2] for r in rows)
    print(f"overall: {overall}")
    return exit_code_for(overall)


def main() -> int:
    ap = argparse.ArgumentParser(description="Run a directory of experiment configs")
    ap.add_argument("--configs", default=os.path.join(ROOT, "configs"), help="directory of YAML configs")
    ap.add_argument("--output-root", default=os.path.join(ROOT, "runs"), help="parent of the run directories")
    ap.add_argument("--only", action="append", help="restrict to an experiment kind (repeatable)")
    ap.add_argument("--validate-only", action="store_true", help="validate without running")
    ap.add_argument("--verbose", "-v", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    return run_suite(args.configs, args.output_root, args.only, args.validate_only)


if __name__ == "__main__":
    sys.exit(main())
