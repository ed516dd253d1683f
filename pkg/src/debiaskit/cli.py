"""Command-line entry point.

Example:
    debiaskit --data data/adult.data data/adult.test \\
        --plans all --seeds 10 --out report.csv

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from .data import DataError, load_adult
from .pipeline import (
    ALL_PLANS,
    RunSettings,
    emit_report,
    plan_from_name,
    run_experiment,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="debiaskit",
        description="Train the income classifier with pre-, in- and "
                    "post-processing bias mitigation and report fairness "
                    "metrics per plan.",
    )
    p.add_argument("--data", nargs="+", required=True, metavar="PATH",
                   help="UCI Adult file(s): adult.data and optionally adult.test")
    p.add_argument("--plans", default="all",
                   help="semicolon-separated plan list; each entry is a "
                        "canonical name ('Pre + In') or compact tokens "
                        "('pre,in'); 'all' runs all eight (default)")
    p.add_argument("--seeds", default="10",
                   help="run count N (seeds 0..N-1) or explicit comma list")
    p.add_argument("--lambda", dest="repair_level", type=float, default=1.0,
                   help="repair level for the Pre stage (default 1.0)")
    p.add_argument("--alpha", type=float, default=1.0,
                   help="adversary trade-off weight for the In stage (default 1.0)")
    p.add_argument("--cost", choices=("fnr", "fpr"), default="fnr",
                   help="generalized cost for the Post stage (default fnr)")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for independent runs (default 1)")
    p.add_argument("--out", metavar="PATH", help="report file (default: stdout)")
    p.add_argument("--format", choices=("csv", "table"), default="csv")
    return p


def parse_plans(spec: str):
    if spec.strip().lower() == "all":
        return list(ALL_PLANS)
    plans = [plan_from_name(tok) for tok in spec.split(";") if tok.strip()]
    if not plans:
        raise ValueError(f"no plans in {spec!r}")
    return plans


def parse_seeds(spec: str):
    spec = spec.strip()
    if "," in spec:
        return [int(tok) for tok in spec.split(",") if tok.strip()]
    count = int(spec)
    if count <= 0:
        raise ValueError("seed count must be positive")
    return list(range(count))


def _write_atomic(path: str, text: str):
    # Temp-write plus rename so a failed run never leaves a partial report.
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        plans = parse_plans(args.plans)
        seeds = parse_seeds(args.seeds)
        for knob, label in ((args.epochs, "--epochs"), (args.batch, "--batch"),
                            (args.lr, "--lr"), (args.jobs, "--jobs")):
            if knob <= 0:
                raise UsageError(f"{label} must be positive")
        if not 0.0 <= args.repair_level <= 1.0:
            raise UsageError("--lambda must be in [0,1]")
        if args.alpha < 0.0:
            raise UsageError("--alpha must be non-negative")
    except UsageError as exc:
        print(f"debiaskit: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"debiaskit: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        dataset = load_adult(args.data)
    except DataError as exc:
        print(f"debiaskit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA

    settings = RunSettings(epochs=args.epochs, batch_size=args.batch,
                           learning_rate=args.lr, repair_level=args.repair_level,
                           alpha=args.alpha, cost_mode=args.cost)
    try:
        print(f"debiaskit: {len(plans)} plan(s) x {len(seeds)} seed(s), "
              f"n={dataset.n}", file=sys.stderr)
        summary = run_experiment(dataset, plans, seeds, settings, jobs=args.jobs)
        text = emit_report(summary, args.format)
    except Exception as exc:
        print(f"debiaskit: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    if args.out:
        try:
            _write_atomic(args.out, text)
        except OSError as exc:
            print(f"debiaskit: runtime error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
    else:
        sys.stdout.write(text)
    return EXIT_OK


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
