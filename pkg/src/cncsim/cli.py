"""Command-line interface.

    cncsim validate <scenario.json>
    cncsim run <scenario.json> [--scheme cnc] [--seed N] [--events out.log] [--bills out.csv]
    cncsim sweep <scenario.json> <sweep.json> --out results.csv
    cncsim trace <scenario.json> --events out.log [--scheme ...] [--seed N]

Set CNCSIM_LOG=debug|info|warning to control verbosity.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

from .engine import Engine, HorizonExceeded
from .harness import load_sweep, materialize, metrics_from_result, run_sweep, write_csv
from .scenario import load_scenario, validate_scenario


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("CNCSIM_LOG", "warning").upper(), logging.WARNING),
        format="%(levelname)s %(name)s %(message)s",
    )
    parser = argparse.ArgumentParser(prog="cncsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a scenario file")
    p_validate.add_argument("scenario")

    for name in ("run", "trace"):
        p = sub.add_parser(name, help="simulate one scenario" if name == "run" else
                           "simulate and write the event trace")
        p.add_argument("scenario")
        p.add_argument("--scheme", choices=["cnc", "computing_first"], default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--deadline", type=float, default=None,
                       help="deadline for workload-generated requests")
        p.add_argument("--events", default=None, required=(name == "trace"),
                       help="write line-delimited event records here")
        p.add_argument("--bills", default=None, help="write per-request bills CSV here")

    p_sweep = sub.add_parser("sweep", help="run a scheme/load/deadline sweep")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("sweep")
    p_sweep.add_argument("--out", required=True)

    args = parser.parse_args(argv)

    if args.command == "validate":
        return _cmd_validate(args)
    if args.command in ("run", "trace"):
        return _cmd_run(args)
    return _cmd_sweep(args)


def _cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    errors = validate_scenario(scenario)
    if errors:
        for err in errors:
            print(f"error: {err}", file=sys.stderr)
        return 1
    print("ok")
    return 0


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.scheme is not None:
        scenario = scenario.with_overrides(scheme=args.scheme)
    seed = args.seed if args.seed is not None else scenario.rng_seed
    scenario = materialize(scenario, seed, deadline_s=args.deadline)

    sink = None
    trace_file = None
    if args.events:
        trace_file = open(args.events, "w")
        sink = lambda line: print(line, file=trace_file)
    try:
        result = Engine(scenario, trace_sink=sink).run()
    except HorizonExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        if trace_file is not None:
            trace_file.close()

    metrics = metrics_from_result(result, scenario.scheme, "scenario", 0.0, seed)
    print(f"scheme={scenario.scheme} seed={seed}")
    print(f"submitted={metrics.submitted} completed={metrics.completed} "
          f"rejected={metrics.rejected} missed={metrics.missed}")
    print(f"success_ratio={metrics.success_ratio:.4f}")
    print(f"mean_cost_completed={metrics.mean_cost_completed:.4f}")
    print(f"mean_cost_fig5_convention={metrics.mean_cost_fig5_convention:.4f}")

    if args.bills:
        with open(args.bills, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["request", "outcome", "metered_wu", "cost",
                 "predicted_response_s", "actual_response_s", "deadline_s"]
            )
            for bill in result.bills:
                state = result.states[bill.request]
                predicted = (
                    state.plan.predicted_response_s
                    if state.plan is not None and state.plan.feasible
                    else ""
                )
                actual = state.response_time_s()
                writer.writerow([
                    bill.request,
                    bill.outcome.value,
                    repr(bill.metered_wu),
                    repr(bill.cost),
                    repr(predicted) if predicted != "" else "",
                    repr(actual) if actual is not None else "",
                    repr(state.reg.deadline_s) if state.reg is not None else "",
                ])
    return 0


def _cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    sweep = load_sweep(args.sweep)
    out = run_sweep(scenario, sweep)
    write_csv(out, args.out)
    print(f"wrote {len(out.cells)} cells to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
