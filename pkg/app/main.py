# app/main.py
"""
Command line entry point.

  python -m app.main run <config.yaml> [--output-dir DIR]
  python -m app.main validate <config.yaml>
  python -m app.main list-experiments

Exit codes: 0 pass, 1 measurements failed acceptance, 2 invalid config,
3 solver failure. BSQ_THREADS sets the FFT worker count.
"""
import argparse
import logging
import sys
from typing import List, Optional

from app.experiments.registry import EXPERIMENTS
from app.experiments.validation import load_config
from app.orchestrator import run
from app.utils.status import exit_code_for

logger = logging.getLogger(__name__)


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _cmd_run(args) -> int:
    report = run(args.config, args.output_dir)
    print(f"{report['experiment']}: {report['status']} (exit {report['exit_code']})")
    if report.get("output_dir"):
        print(f"artifacts: {report['output_dir']}")
    for err in report.get("errors", []):
        print(f"  {err}")
    return int(report["exit_code"])


def _cmd_validate(args) -> int:
    _, issues = load_config(args.config)
    if not issues:
        print(f"{args.config}: ok")
        return exit_code_for("pass")
    for i in issues:
        print(f"{args.config}: {i['code']} [{i['field']}] {i['message']}")
    return exit_code_for("invalid")


def _cmd_list(args) -> int:
    width = max(len(k) for k in EXPERIMENTS)
    for kind, exp in EXPERIMENTS.items():
        print(f"{kind.ljust(width)}  {exp.description}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="app.main", description="Boussinesq mild-solution experiments")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", help="path to a YAML experiment config")
    p_run.add_argument("--output-dir", default=None, help="override the config's output_dir")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="list the violations of a config")
    p_val.add_argument("config", help="path to a YAML experiment config")
    p_val.set_defaults(func=_cmd_validate)

    p_list = sub.add_parser("list-experiments", help="list experiment kinds")
    p_list.set_defaults(func=_cmd_list)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
