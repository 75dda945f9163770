"""Command-line front end for the experiment runners and solvers.

Subcommands build an ExperimentSpec from an optional JSON config file plus
flag overrides, run it, and emit CSV + sidecar metadata. Exit codes: 0 on
success, 1 on configuration errors, 2 on runtime failures.
"""

from __future__ import annotations

import argparse
import json
import sys

from .analysis import optimal_period, optimal_threshold, threshold_avg_cost
from .core import CostModel, cap_threshold
from .experiments import (
    ConfigError,
    ExperimentSpec,
    emit,
    run_policy_comparison,
    run_threshold_sweep,
    run_trace_compare,
)
from .mdp import MdpConfig, solve_average, write_policy_csv


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); flag misuse is a config error
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="agecost", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment spec; flags override its fields")
        p.add_argument("--lambda", dest="rate", type=float, help="Bernoulli arrival rate")
        p.add_argument("--p", dest="update_cost", type=float, help="update cost")
        p.add_argument("--seed", type=int, help="base seed")
        p.add_argument("--runs", type=int, help="simulation runs per grid point")
        p.add_argument("--requests", type=int, help="requests per run")
        p.add_argument("--out", help="output CSV path")

    p = sub.add_parser("sweep-threshold", help="simulated vs closed-form cost across thresholds")
    common(p)
    p.add_argument("--tau", type=int, help="restrict the sweep to a single threshold")

    p = sub.add_parser("compare", help="compare policies across a rate or cost grid")
    common(p)
    p.add_argument("--sweep", choices=("lambda", "cost"), required=True)

    p = sub.add_parser("trace-compare", help="replay policies on a timestamp trace")
    common(p)
    p.add_argument("--trace", help="trace file, one 'timestamp[,...]' line per request")
    p.add_argument("--slot-duration", dest="slot_duration", type=float, help="slot length in trace time units")

    p = sub.add_parser("solve-mdp", help="relative value iteration for the optimal average cost")
    p.add_argument("--lambda", dest="rate", type=float, required=True)
    p.add_argument("--p", dest="update_cost", type=float, required=True)
    p.add_argument("--staleness", choices=("linear", "quadratic"), default="linear")
    p.add_argument("--state-cap", dest="state_cap", type=int, default=1024)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--out", help="write the s,h,action diagnostic CSV here")

    p = sub.add_parser("optimal-threshold", help="closed-form optimal threshold and period")
    p.add_argument("--lambda", dest="rate", type=float, required=True)
    p.add_argument("--p", dest="update_cost", type=float, required=True)
    p.add_argument("--staleness", choices=("linear", "quadratic"), default="linear")
    return parser


def _spec_from_args(args, kind: str, name: str) -> ExperimentSpec:
    data: dict = {}
    if args.config:
        with open(args.config) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.config}: {exc}") from None
    data.setdefault("name", name)
    data["kind"] = data.get("kind", kind)
    model = data.setdefault("model", {"staleness": {"kind": "linear"}, "update_cost": 50.0})
    if args.update_cost is not None:
        model["update_cost"] = args.update_cost
    arrival = data.setdefault(
        "arrival", {"kind": "trace"} if kind == "trace_compare" else {"kind": "bernoulli"}
    )
    if getattr(args, "rate", None) is not None:
        arrival["rate"] = args.rate
    if getattr(args, "trace", None) is not None:
        arrival["path"] = args.trace
    if getattr(args, "slot_duration", None) is not None:
        arrival["slot_duration"] = args.slot_duration
    if getattr(args, "tau", None) is not None:
        data["grid"] = [args.tau]
    if args.seed is not None:
        data["base_seed"] = args.seed
    if args.runs is not None:
        data["n_runs"] = args.runs
    if args.requests is not None:
        data["n_requests"] = args.requests
    if args.out is not None:
        data["output_path"] = args.out
    return ExperimentSpec.from_dict(data)


def _run_experiment(args) -> int:
    if args.command == "sweep-threshold":
        spec = _spec_from_args(args, "threshold_sweep", "threshold-sweep")
        table = run_threshold_sweep(spec)
    elif args.command == "compare":
        kind = "lambda_sweep" if args.sweep == "lambda" else "cost_sweep"
        spec = _spec_from_args(args, kind, f"compare-{args.sweep}")
        table = run_policy_comparison(spec)
    else:
        spec = _spec_from_args(args, "trace_compare", "trace-compare")
        table = run_trace_compare(spec)
    out = spec.output_path or f"{spec.name}.csv"
    emit(table, out)
    print(f"wrote {len(table.rows)} rows to {out} (+ {out}.meta.json)")
    return 0


def _run_solve_mdp(args) -> int:
    model = CostModel.from_config({"staleness": {"kind": args.staleness}, "update_cost": args.update_cost})
    config = MdpConfig(rate=args.rate, model=model, state_cap=args.state_cap, tolerance=args.tolerance)
    sol = solve_average(config)
    print(f"gain={sol.gain:.10g} threshold={sol.threshold} "
          f"iterations={sol.iterations_used} residual={sol.residual:.3e}")
    if args.out:
        write_policy_csv(sol, args.out)
        print(f"wrote policy dump to {args.out}")
    return 0


def _run_optimal_threshold(args) -> int:
    model = CostModel.from_config({"staleness": {"kind": args.staleness}, "update_cost": args.update_cost})
    ts = optimal_threshold(args.rate, model)
    ps = optimal_period(args.rate, model)
    print(json.dumps({
        "tau_star": ts.tau_star,
        "tau_continuous": ts.tau_continuous,
        "cost_at_tau_star": ts.cost_at_tau_star,
        "clamped_to_cap": ts.clamped_to_cap,
        "delta_star": cap_threshold(model),
        "naive_cost": threshold_avg_cost(args.rate, model, cap_threshold(model)),
        "d_star": ps.d_star,
        "cost_at_d_star": ps.cost_at_d_star,
    }))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "solve-mdp":
            return _run_solve_mdp(args)
        if args.command == "optimal-threshold":
            return _run_optimal_threshold(args)
        return _run_experiment(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
