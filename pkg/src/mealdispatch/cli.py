"""Command line interface.

Subcommands: solve (one static snapshot), simulate (full-day rolling
horizon), generate (synthetic instance files), calibrate (alpha x
iterations sweep), report (pair two metrics files and compute GAP).

Exit codes: 0 success, 1 input or usage error, 2 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional, Sequence

from .grasp import SolverConfig, SolverInvariantError, grasp
from .instances import (
    GeneratorParams,
    InstanceFormatError,
    generate_instance,
    load_instance_dir,
    serialize_instance,
)
from .metrics import (
    DEFAULT_ALPHAS,
    DEFAULT_ITERATION_COUNTS,
    calibrate,
    compute_metrics,
    format_report_table,
    merge_report,
    metrics_csv_rows,
    published_baseline_rows,
    read_metrics_csv,
    write_calibration_csv,
    write_metrics_csv,
)
from .simulator import EventLogError, SimConfig, simulate_day, write_event_log


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract here is 1.
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.7, help="RCL fraction in [0, 1]")
    parser.add_argument("--iterations", type=int, default=1000, help="multi-start rounds")
    parser.add_argument("--seed", type=int, default=0, help="base RNG seed")
    parser.add_argument(
        "--time-budget-s",
        type=float,
        default=None,
        help="wall-clock budget per solve; the incumbent so far is kept on expiry",
    )
    parser.add_argument(
        "--local-search",
        choices=("one_pass", "full_descent"),
        default="full_descent",
        help="single best-swap pass or descent to a local optimum",
    )
    parser.add_argument(
        "--objective",
        choices=("lex", "cost_only"),
        default="lex",
        help="maximize fulfillment then minimize routing time, or cost alone",
    )
    parser.add_argument("--n-jobs", type=int, default=1, help="worker threads (same result)")
    parser.add_argument(
        "--engine",
        choices=("auto", "compiled", "reference"),
        default="auto",
        help="implementation to run; both give identical output",
    )


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        alpha=args.alpha,
        iterations=args.iterations,
        seed=args.seed,
        local_search_mode=args.local_search,
        time_budget_s=args.time_budget_s,
        objective=args.objective,
        n_jobs=args.n_jobs,
        engine=args.engine,
    )


def _cmd_solve(args: argparse.Namespace) -> int:
    instance = load_instance_dir(args.instance_dir)
    result = grasp(
        list(instance.couriers),
        list(instance.orders),
        instance,
        _solver_config(args),
        dispatch_time=args.dispatch_t,
    )
    routes = []
    for cid in sorted(result.assignment.routes):
        for seq, (route, sched) in enumerate(
            zip(result.assignment.routes[cid], result.schedules[cid])
        ):
            routes.append(
                {
                    "courier": cid,
                    "route_seq": seq,
                    "restaurant": route.restaurant_id,
                    "orders": list(route.orders),
                    "depart": sched.depart,
                    "pickup_end": sched.pickup_end,
                    "dropoffs": [
                        {"order": d.order_id, "arrive": d.arrive, "complete": d.deliver_complete}
                        for d in sched.dropoffs
                    ],
                }
            )
    doc = {
        "dispatch_time": args.dispatch_t,
        "fulfilled": result.fulfilled,
        "cost_s": result.cost_s,
        "best_iteration": result.best_iteration,
        "iterations_run": result.iterations_run,
        "routes": routes,
        "unassigned": sorted(result.assignment.unassigned),
    }
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    instance = load_instance_dir(args.instance_dir)
    config = SimConfig(
        epoch_s=args.epoch_s,
        solver=_solver_config(args),
        return_to_start=args.return_to_start,
    )
    label = args.label if args.label else args.instance_dir.rstrip("/").split("/")[-1]
    result = simulate_day(instance, config, label=label)
    if args.events_out:
        write_event_log(result.events, args.events_out)
    row = compute_metrics(result, instance)
    if args.metrics_out:
        write_metrics_csv([row], args.metrics_out)
    sys.stdout.write(format_report_table([row]))
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    params = GeneratorParams(
        n_orders=args.orders,
        n_couriers=args.couriers,
        n_restaurants=args.restaurants,
        horizon_s=args.horizon_s,
        seed=args.seed,
    )
    instance = generate_instance(params)
    paths = serialize_instance(instance, args.out)
    for p in paths:
        print(p)
    return 0


def _parse_grid(text: str, cast, flag: str) -> List:
    try:
        return [cast(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"{flag} must be a comma-separated list, got {text!r}") from None


def _cmd_calibrate(args: argparse.Namespace) -> int:
    instance = load_instance_dir(args.instance_dir)
    alphas = _parse_grid(args.alphas, float, "--alphas") if args.alphas else list(DEFAULT_ALPHAS)
    iteration_counts = (
        _parse_grid(args.iteration_counts, int, "--iteration-counts")
        if args.iteration_counts
        else list(DEFAULT_ITERATION_COUNTS)
    )
    base = SimConfig(
        epoch_s=args.epoch_s,
        solver=_solver_config(args),
        return_to_start=args.return_to_start,
    )
    cells, rows = calibrate(
        instance,
        alphas=alphas,
        iteration_counts=iteration_counts,
        replications=args.replications,
        seed=args.seed,
        sim_config=base,
    )
    write_calibration_csv(rows, args.out)
    if args.cells_out:
        import csv as _csv

        with open(args.cells_out, "w", newline="", encoding="utf-8") as fh:
            w = _csv.writer(fh)
            w.writerow(["alpha", "iterations", "mean_of", "mean_runtime_s", "replications"])
            for c in cells:
                w.writerow([c.alpha, c.iterations, c.mean_of, round(c.mean_runtime_s, 3), c.replications])
    for c in cells:
        print(f"alpha={c.alpha:>4}  iterations={c.iterations:>5}  mean_of={c.mean_of:.2f}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    if bool(args.baseline) == bool(args.published):
        raise ValueError("report needs exactly one of --baseline FILE or --published")
    baseline = published_baseline_rows() if args.published else read_metrics_csv(args.baseline)
    candidate = read_metrics_csv(args.candidate)
    rows, gaps = merge_report(baseline, candidate)
    if args.format == "csv":
        if args.out:
            write_metrics_csv(rows, args.out, gaps=gaps)
        else:
            import csv as _csv

            w = _csv.DictWriter(
                sys.stdout, fieldnames=["instance", "orders", "available_couriers", "cu", "of", "routing_time_min", "gap_percent"]
            )
            w.writeheader()
            for rec in metrics_csv_rows(rows, gaps):
                w.writerow(rec)
    else:
        text = format_report_table(rows, gaps)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mealdispatch", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one static snapshot")
    p.add_argument("instance_dir", help="directory holding stores/couriers/orders CSVs")
    p.add_argument("--dispatch-t", type=int, default=0, help="dispatch instant, seconds")
    p.add_argument("--out", default=None, help="write the JSON solution here instead of stdout")
    _solver_flags(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("simulate", help="replay a full day at fixed epochs")
    p.add_argument("instance_dir")
    p.add_argument("--epoch-s", type=int, default=120, help="seconds between dispatch rounds")
    p.add_argument("--return-to-start", action="store_true", help="couriers head home after each plan")
    p.add_argument("--events-out", default=None, help="write the JSONL event log here")
    p.add_argument("--metrics-out", default=None, help="write a one-row metrics CSV here")
    p.add_argument("--label", default=None, help="instance label in reports")
    _solver_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("generate", help="write a synthetic instance")
    p.add_argument("--orders", type=int, default=100)
    p.add_argument("--couriers", type=int, default=30)
    p.add_argument("--restaurants", type=int, default=12)
    p.add_argument("--horizon-s", type=int, default=43200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="instance", help="output directory")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("calibrate", help="sweep the (alpha, iterations) grid")
    p.add_argument("instance_dir")
    p.add_argument("--alphas", default=None, help="comma list; default 0.0,0.1,...,1.0")
    p.add_argument("--iteration-counts", default=None, help="comma list; default 500,1000,1500,2000")
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--epoch-s", type=int, default=120)
    p.add_argument("--return-to-start", action="store_true")
    p.add_argument("--out", default="calibration.csv", help="per-replication CSV")
    p.add_argument("--cells-out", default=None, help="optional per-cell mean CSV")
    _solver_flags(p)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("report", help="pair two runs and compute GAP per instance")
    p.add_argument("--baseline", default=None, help="baseline metrics CSV")
    p.add_argument("--published", action="store_true", help="use the bundled published baseline")
    p.add_argument("--candidate", required=True, help="candidate metrics CSV")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--out", default=None, help="write here instead of stdout")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    except (SolverInvariantError, EventLogError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    except (InstanceFormatError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
