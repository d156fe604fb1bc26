"""Command-line entry point: run scenarios, compute metrics, self-check."""

from __future__ import annotations

import argparse
import json
import sys

from .plant import SimulationBlowup
from .scenario import (ClosedLoopLog, compute_metrics, load_scenario,
                       run_scenario, scenario_file)


def _cmd_run(args) -> int:
    sc = load_scenario(scenario_file(args.scenario))
    log = run_scenario(sc, collect_timing=not args.no_timing)
    out = args.out or f"{sc.name}_log.csv"
    with open(out, "w") as fh:
        log.to_csv(fh)
    metrics = compute_metrics(log, settle_time=args.settle,
                              tau_max=sc.cfg.tau_max, qdot_max=sc.cfg.qdot_max)
    if args.summary:
        with open(args.summary, "w") as fh:
            json.dump(metrics, fh, indent=2)
            fh.write("\n")
    print(f"scenario {sc.name}: {len(log)} samples -> {out}")
    print(f"  max path error after {args.settle:g} s: "
          f"{metrics['max_err_settled'] * 1e3:.4g} mm")
    print(f"  theta(end) = {metrics['theta_end']:.4f},  "
          f"mean solve {metrics['solve_ms_mean']:.3f} ms "
          f"(max {metrics['solve_ms_max']:.3f} ms)")
    if metrics["fault_count"]:
        print(f"  WARNING: {metrics['fault_count']} solver faults")
    return 0


def _cmd_metrics(args) -> int:
    log = ClosedLoopLog.from_csv(args.csv)
    metrics = compute_metrics(log, settle_time=args.settle,
                              tau_max=args.tau_max, qdot_max=args.qdot_max)
    json.dump(metrics, sys.stdout, indent=2)
    print()
    return 0


def _cmd_check(args) -> int:
    from .acceptance import run_all
    results = run_all(verbose=True, fast=args.fast)
    return 0 if all(r.passed for r in results) else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpfc",
                                description="Model predictive path-following "
                                            "control of a 3-joint arm.")
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="run a closed-loop scenario")
    pr.add_argument("scenario",
                    help="scenario file, or a built-in name (clover, hello)")
    pr.add_argument("--out", help="output CSV (default <name>_log.csv)")
    pr.add_argument("--summary", help="write metrics JSON to this file")
    pr.add_argument("--settle", type=float, default=2.5,
                    help="settle time for summary metrics [s]")
    pr.add_argument("--no-timing", action="store_true",
                    help="write zeros to solve_ms (deterministic output)")
    pr.set_defaults(func=_cmd_run)

    pm = sub.add_parser("metrics", help="summarise an existing log CSV")
    pm.add_argument("csv")
    pm.add_argument("--settle", type=float, required=True,
                    help="ignore samples before this time [s]")
    pm.add_argument("--tau-max", type=float, help="torque bound to check")
    pm.add_argument("--qdot-max", type=float, help="velocity bound to check")
    pm.set_defaults(func=_cmd_metrics)

    pc = sub.add_parser("check", help="run the acceptance checks")
    pc.add_argument("--fast", action="store_true",
                    help="shorten the closed-loop runs (smoke test only)")
    pc.set_defaults(func=_cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SimulationBlowup as exc:
        print(f"error: simulation diverged: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
