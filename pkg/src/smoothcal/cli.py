"""Command-line entry points: metrics, sweep, verify, bounds."""

import argparse
import json
import sys

from .bounds import BoundInputs, bound_report
from .experiment import ConfigError, load_config, metrics_cmd, run_sweep, run_verification, write_sweep_csvs


def _cmd_metrics(args) -> int:
    try:
        report = metrics_cmd(args.input, args.mode, num_bins=args.num_bins, bandwidth=args.bandwidth)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(report.to_json())
    return 0


def _cmd_sweep(args) -> int:
    try:
        config = load_config(args.config)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result = run_sweep(config)
    cells_path, summary_path = write_sweep_csvs(result, config, args.outdir)
    print(json.dumps({"cells": cells_path, "summary": summary_path, "rows": len(result.rows)}))
    return 0


def _cmd_verify(args) -> int:
    try:
        report = run_verification(args.suite, seed=args.seed, count=args.count, kb_stepsize=args.kb_stepsize)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(report.to_json())
    if report.skipped:
        for item in report.skipped:
            print(f"skipped case {item['case']}: {item['detail']}", file=sys.stderr)
    if not report.passed:
        for item in report.failures:
            print(f"FAILED case {item['case']} (seed {item['seed']}): {item['detail']}", file=sys.stderr)
        return 1
    return 0


def _cmd_bounds(args) -> int:
    raw = args.inputs
    try:
        if raw.lstrip().startswith("{"):
            payload = json.loads(raw)
        else:
            with open(raw, encoding="utf-8") as fh:
                payload = json.load(fh)
        bound_name = payload.pop("bound")
        measured = payload.pop("measured", float("nan"))
        certified = bool(payload.pop("gamma_certified", False))
        inputs = BoundInputs(**payload)
        report = bound_report(bound_name, inputs, measured, gamma_certified=certified)
    except (KeyError, TypeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smoothcal", description="Smooth calibration error toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="metric report for a (value,label) CSV")
    p.add_argument("--input", required=True, help="two-column CSV of (value, label)")
    p.add_argument("--mode", choices=("prob", "logit"), default="prob")
    p.add_argument("--num-bins", type=int, default=10)
    p.add_argument("--bandwidth", type=float, default=1.0)
    p.set_defaults(fn=_cmd_metrics)

    p = sub.add_parser("sweep", help="run a declarative experiment sweep")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--outdir", default=".", help="directory for cells.csv / summary.csv")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("verify", help="run a randomized verification suite")
    p.add_argument("--suite", required=True, help="oracle | descent | bounds | gradients")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kb-stepsize", type=float, default=1.0, help="kernel-boosting stepsize for the descent suite")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("bounds", help="evaluate a training bound from JSON inputs")
    p.add_argument("--inputs", required=True, help="JSON object or path; keys: bound, gamma, w, T, ... , measured")
    p.set_defaults(fn=_cmd_bounds)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
