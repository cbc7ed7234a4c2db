"""Command-line front end.

    bdhd generate --topology circle --size 6.2831853 --lambda 5 --events 50 \\
                  --defenders 5 --vmax 5 --seed 7 -o inst.json
    bdhd solve --algo edp inst.json
    bdhd export-lp inst.json -o model.lp
    bdhd simulate --horizon 0.5 inst.json --trajectory-csv traj.csv
    bdhd experiment heterogeneity --runs 10 -o results.csv

Exit codes: 0 success, 1 solver/runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import experiments
from .errors import BDHDError
from .flow_solver import build_flow_model, export_lp, solve_branch_and_bound, solve_external
from .geometry import BoundarySpace
from .instance import (
    GenerationConfig,
    generate_instance,
    instance_to_dict,
    load_instance,
    save_instance,
)
from .online import HorizonParams, simulate_online, write_trajectory_csv
from .reachability import build_relation
from .verify import check_plan

ALGOS = ("dp", "bnb", "external", "edp", "oracle")
DEFAULT_SIZES = {"circle": 2 * math.pi, "square": 1.0, "sphere": 1.0}


def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _horizon(text):
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return _positive(text)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args) -> int:
    size = args.size
    if size is None and args.topology != "interval":
        size = DEFAULT_SIZES[args.topology]
    try:
        space = BoundarySpace(args.topology, size)
        cfg = GenerationConfig(
            lam=args.lam, n_events=args.events, k_defenders=args.defenders,
            v_min=args.vmin, v_max=args.vmax, speed_sum_target=args.speed_sum,
            seed=args.seed,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    inst = generate_instance(space, cfg)
    if args.output:
        save_instance(inst, args.output)
    else:
        sys.stdout.write(json.dumps(instance_to_dict(inst), indent=1) + "\n")
    return 0


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    start = time.perf_counter()
    rel = build_relation(inst)
    status = "optimal"
    if args.algo == "bnb":
        res = solve_branch_and_bound(build_flow_model(inst, rel), time_limit=args.time_limit)
        plan, status = res.plan, res.status
    elif args.algo == "external":
        model = build_flow_model(inst, rel)
        lp_path = Path(args.lp or (str(args.instance) + ".lp"))
        export_lp(model, lp_path)
        res = solve_external(inst, model, lp_path, args.solver, args.time_limit)
        plan, status = res.plan, res.status
    else:
        plan, count, status = experiments.run_algo(
            args.algo, inst, rel, time_limit=args.time_limit,
            dp_max_entries=args.dp_max_entries,
        )
    wall_ms = (time.perf_counter() - start) * 1000
    count = plan.intercepted_count if plan is not None else count
    if plan is not None and not check_plan(inst, plan).valid:
        print("error: solver returned an invalid plan", file=sys.stderr)
        return 1
    out = {
        "plan": None if plan is None else plan.to_dict(),
        "report": {
            "algo": args.algo,
            "count": count,
            "rate": count / inst.n if inst.n else 1.0,
            "wall_ms": round(wall_ms, 3),
            "status": status,
            "seed": inst.seed,
        },
    }
    _emit(json.dumps(out, indent=1) + "\n", args.output)
    return 0


def cmd_export_lp(args) -> int:
    inst = load_instance(args.instance)
    model = build_flow_model(inst, build_relation(inst))
    out = args.output or (str(args.instance) + ".lp")
    export_lp(model, out)
    print(f"wrote {out}: {model.n_vars} variables, {len(model.constraints)} constraints", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    inst = load_instance(args.instance)
    report = simulate_online(inst, HorizonParams(args.horizon))
    d = report.to_dict(with_trajectories=not args.no_trajectories)
    d["seed"] = inst.seed
    _emit(json.dumps(d, indent=1) + "\n", args.output)
    if args.trajectory_csv:
        write_trajectory_csv(report, args.trajectory_csv)
    return 0


def cmd_experiment(args) -> int:
    preset = experiments.make_preset(
        args.preset, runs=args.runs, n_events=args.events, base_seed=args.seed
    )
    started = datetime.now(timezone.utc).isoformat()
    rows = experiments.run_experiment(preset, jobs=args.jobs, time_limit=args.time_limit)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            experiments.write_rows(rows, fh)
        meta = {
            "preset": preset.name, "runs": preset.runs, "base_seed": preset.base_seed,
            "cells": len(preset.cells), "started": started,
            "finished": datetime.now(timezone.utc).isoformat(),
        }
        Path(str(args.output) + ".meta.json").write_text(json.dumps(meta, indent=1) + "\n")
    else:
        experiments.write_rows(rows, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    common.add_argument("--time-limit", type=_positive, default=60.0,
                        help="solver time limit in seconds (default 60)")
    common.add_argument("-o", "--output", help="output file (default stdout)")

    parser = argparse.ArgumentParser(prog="bdhd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="generate a random instance")
    g.add_argument("--topology", required=True, choices=("interval", "circle", "square", "sphere"))
    g.add_argument("--size", type=float, default=None,
                   help="circumference / side / radius (defaults 2*pi / 1 / 1; unused for interval)")
    g.add_argument("--lambda", dest="lam", type=_positive, required=True, help="attack rate")
    g.add_argument("--events", type=int, required=True)
    g.add_argument("--defenders", type=int, required=True)
    g.add_argument("--vmin", type=_positive, default=1.0)
    g.add_argument("--vmax", type=_positive, default=1.0)
    g.add_argument("--speed-sum", type=_positive, default=None,
                   help="rescale speeds to this total")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", parents=[common], help="compute an interception plan")
    s.add_argument("instance")
    s.add_argument("--algo", choices=ALGOS, default="edp")
    s.add_argument("--solver", default=None,
                   help="external solver command (default: $BDHD_EXTERNAL_SOLVER)")
    s.add_argument("--lp", default=None, help="where to write the LP file for --algo external")
    s.add_argument("--dp-max-entries", type=int, default=2**30)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("export-lp", parents=[common], help="write the flow model as an LP file")
    e.add_argument("instance")
    e.set_defaults(func=cmd_export_lp)

    m = sub.add_parser("simulate", parents=[common], help="finite-horizon online simulation")
    m.add_argument("instance")
    m.add_argument("--horizon", type=_horizon, required=True, help="look-ahead T (> 0) or 'inf'")
    m.add_argument("--trajectory-csv", default=None)
    m.add_argument("--no-trajectories", action="store_true",
                   help="omit trajectories from the JSON report")
    m.set_defaults(func=cmd_simulate)

    x = sub.add_parser("experiment", parents=[common], help="run a parameter sweep preset")
    x.add_argument("preset", choices=experiments.PRESET_NAMES)
    x.add_argument("--runs", type=int, default=None, help="seeds per grid cell")
    x.add_argument("--events", type=int, default=None, help="override events per instance")
    x.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    if getattr(args, "runs", None) is not None and args.runs < 1:
        parser.error("--runs must be >= 1")
    try:
        return args.func(args)
    except (BDHDError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
