"""Command-line entry point.

Exit codes: 0 success, 1 configuration or I/O error, 2 a tolerance check
failed under ``--check``.
"""

from __future__ import annotations

import argparse
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import EXPERIMENTS, RunConfig, parse_config, print_defaults
from .errors import SedError
from .experiments import RUNNERS, dumps

OUT_DIR_ENV = "SEDELECTRON_OUT_DIR"


def _provenance(rc: RunConfig) -> list[str]:
    lines = [f"sedelectron {__version__}", f"seed = {rc.seed}", "config:"]
    return lines + rc.canonical_text().rstrip("\n").splitlines()


def _with_header(body: str, header: list[str]) -> str:
    return "".join(f"# {line}\n" for line in header) + body


def run_experiment(rc: RunConfig, out_dir: str | os.PathLike | None = None, check: bool = False) -> int:
    """Run ``rc`` and write its artifacts; returns the exit status."""
    out = Path(out_dir if out_dir is not None else rc.output_dir)
    start = time.perf_counter()
    try:
        outcome = RUNNERS[rc.experiment](rc)
    except SedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - start

    header = _provenance(rc)
    summary = {
        "experiment": rc.experiment,
        "seed": rc.seed,
        "unit_system": rc.unit_system,
        "config": rc.canonical_text(),
        "inputs": {k: v for k, v in rc.params},
        "versions": {
            "sedelectron": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "checks": [c.to_dict() for c in outcome.checks],
        "all_checks_passed": all(c.passed for c in outcome.checks),
        "wall_time_s": wall,
        **outcome.results,
    }
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, body in outcome.files.items():
            (out / name).write_text(_with_header(body, header))
        for name, obj in outcome.json_files.items():
            (out / name).write_text(dumps({"seed": rc.seed, "config": rc.canonical_text(), **obj}))
        (out / "summary.json").write_text(dumps(summary))
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 1

    for c in outcome.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.6g} (limit {c.limit:g})")
    if check and not summary["all_checks_passed"]:
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sedelectron", description="Zero-point-field electron experiments.")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", help="configuration file (defaults apply when omitted)")
    ap.add_argument("--seed", type=int, help="override the configured seed")
    ap.add_argument("--check", action="store_true", help="exit 2 if a tolerance check fails")
    ap.add_argument("--print-defaults", action="store_true", help="print the default configuration and exit")
    ap.add_argument("--out", help=f"output directory (overrides ${OUT_DIR_ENV} and the config)")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.print_defaults:
        sys.stdout.write(print_defaults(args.experiment))
        return 0
    try:
        text = Path(args.config).read_text() if args.config else ""
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        rc = parse_config(text, experiment=args.experiment, seed=args.seed)
    except SedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = args.out or os.environ.get(OUT_DIR_ENV) or rc.output_dir
    return run_experiment(rc, out, args.check)


if __name__ == "__main__":
    sys.exit(main())
