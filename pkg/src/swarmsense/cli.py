"""Command-line experiment harness.

Subcommands chain the pipeline: ingest -> generate-plans -> optimize ->
schedule -> simulate, or `run` for the whole batch and `plot` for SVG figures.
Exit codes: 0 ok, 1 usage, 2 data error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from . import collective, env as env_mod, metrics as metrics_mod, sim as sim_mod
from .config import ScenarioConfig, load_config
from .errors import DataError, RuntimeFailure, SwarmSenseError
from .pipeline import (
    generate_all_plans,
    planned_paths,
    run_batch,
    run_cell,
    write_summary_json,
)
from .plangen import read_plan_set_csv, write_plan_set_csv
from .scheduling import (
    assign_priorities,
    detect_collisions,
    schedule_ca,
    write_events_csv,
)
from .seeding import rng_for

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

OUT_ROOT_ENV = "SWARMSENSE_OUT"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    root = os.environ.get(OUT_ROOT_ENV)
    return Path(root) if root else Path("out")


def _load(args) -> ScenarioConfig:
    return load_config(args.config)


def cmd_ingest(args) -> int:
    cfg = _load(args)
    environment = cfg.build_env()
    traj = args.trajectories or (cfg.resolve(cfg.trajectories_csv) if cfg.trajectories_csv else None)
    if traj is None:
        raise DataError("no trajectories file: pass --trajectories or set trajectories_csv")
    records = env_mod.read_trajectories_csv(traj)
    result = env_mod.ingest_trajectories(records, environment, cfg.window)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "requirements.csv"
    env_mod.write_requirement_csv(result.requirement, path)
    if result.empty_warning:
        print("warning: no trajectory records; requirement is all zero", file=sys.stderr)
    if result.rejected_records:
        print(f"warning: rejected {result.rejected_records} out-of-range records", file=sys.stderr)
    print(path)
    return EXIT_OK


def cmd_generate_plans(args) -> int:
    cfg = _load(args)
    environment = cfg.build_env()
    requirement = cfg.load_requirement(environment)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    plan_sets = generate_all_plans(cfg, environment, requirement, seed)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    for ps in plan_sets:
        write_plan_set_csv(ps, out / f"plans_agent_{ps.agent_id}.csv")
    print(out)
    return EXIT_OK


def _read_plan_sets(cfg: ScenarioConfig, plans_dir: Path, environment):
    plan_sets = []
    for i in range(cfg.n_drones):
        path = plans_dir / f"plans_agent_{i}.csv"
        if not path.exists():
            raise DataError(f"missing plan file {path}")
        plan_sets.append(read_plan_set_csv(path, i, environment))
    return plan_sets


def cmd_optimize(args) -> int:
    cfg = _load(args)
    environment = cfg.build_env()
    requirement = cfg.load_requirement(environment)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    plan_sets = _read_plan_sets(cfg, Path(args.plans), environment)
    tree_seed = cfg.tree_seed if cfg.tree_seed is not None else seed
    selection = collective.optimize(
        plan_sets, requirement, iterations=cfg.iterations, rng=rng_for(tree_seed, "tree")
    )
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    collective.write_selection(selection, out / "selection.csv", out / "selection_summary.json")
    print(out / "selection.csv")
    return EXIT_OK


def _paths_payload(paths) -> dict:
    return {
        "paths": [
            {
                "drone_id": p.drone_id,
                "legs": [
                    {"start": list(l.start), "end": list(l.end), "depart": l.depart, "arrive": l.arrive}
                    for l in p.legs
                ],
                "hovers": [{"cell": h.cell, "start": h.start, "end": h.end} for h in p.hovers],
                "waits": [
                    {"pos": list(w.pos), "cell": w.cell, "start": w.start, "end": w.end}
                    for w in p.waits
                ],
            }
            for p in paths
        ]
    }


def cmd_schedule(args) -> int:
    cfg = _load(args)
    environment = cfg.build_env()
    requirement = cfg.load_requirement(environment)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    plan_sets = _read_plan_sets(cfg, Path(args.plans), environment)
    chosen = collective.read_selection_csv(args.selection)
    if len(chosen) != cfg.n_drones:
        raise DataError(f"selection covers {len(chosen)} agents, config has {cfg.n_drones}")
    selection = collective.Selection(chosen=chosen, aggregate=None, rss=float("nan"))
    selection.aggregate = sum(ps.plans[i].hover for ps, i in zip(plan_sets, chosen))

    paths = planned_paths(plan_sets, selection, environment, cfg)
    events = detect_collisions(paths, cfg.field_params())
    priorities = assign_priorities(cfg.n_drones, rng_for(seed, "priorities"))
    repaired = schedule_ca(paths, priorities, cfg.field_params(), environment)

    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    write_events_csv(events, out / "events.csv")
    with open(out / "schedule.json", "w") as f:
        json.dump(_paths_payload(repaired), f, indent=2)
        f.write("\n")
    print(out / "schedule.json")
    return EXIT_OK


def _field_dump_hook(cfg: ScenarioConfig, environment, run_dir: Path, stride: int, drone_id: int):
    """Render the chosen drone's steering field on a 5 cm lattice every `stride` ticks."""
    from .pfield import field_lattice, total_vector
    from .plots import render_field_quiver

    field_dir = run_dir / "field"
    field_dir.mkdir(parents=True, exist_ok=True)
    params = cfg.field_params()
    counter = {"tick": 0}

    def hook(t, states, priorities):
        k = counter["tick"]
        counter["tick"] += 1
        if k % stride != 0:
            return
        me = next((s for s in states if s[0] == drone_id), None)
        if me is None or me[2] == sim_mod.DONE or me[3] is None:
            return
        neighbors = [(i, pos) for i, pos, phase, _ in states if i != drone_id and phase != sim_mod.DONE]

        def evaluate(p):
            try:
                vec, _ = total_vector(p, me[3], drone_id, neighbors, environment.walls,
                                      params, priorities, {}, cfg.seeds[0])
            except Exception:
                return (0.0, 0.0)
            return vec

        samples = field_lattice(environment.bounds, 0.05, evaluate)
        render_field_quiver(samples, environment.walls, field_dir / f"tick_{k:06d}.svg")

    return hook


def cmd_simulate(args) -> int:
    cfg = _load(args)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    method = args.method
    if method not in sim_mod.METHODS:
        raise DataError(f"unknown method {method!r}; expected one of {sim_mod.METHODS}")
    out = _out_dir(args)
    run_dir = out / "runs" / f"{method}_seed{seed}"
    run_dir.mkdir(parents=True, exist_ok=True)
    hook = None
    if args.field_dump:
        environment = cfg.build_env()
        hook = _field_dump_hook(cfg, environment, run_dir, args.field_dump, args.field_drone)
    result = run_cell(cfg, method, seed, tick_hook=hook)
    sim_mod.write_trajectory_csv(result.report, run_dir / "trajectory.csv")
    sim_mod.write_report_json(result.report, run_dir / "report.json")
    write_events_csv(result.events, run_dir / "events.csv")
    print(
        f"{method} seed {seed}: energy {result.metrics.energy_J:.1f} J, "
        f"risk {result.metrics.risk_ratio:.4f}, mismatch {result.metrics.mismatch_rss:.4f}"
    )
    return EXIT_OK


def _parse_only(value: str) -> tuple[str, int]:
    try:
        method, seed = value.rsplit(":", 1)
        return method, int(seed)
    except ValueError as exc:
        raise DataError(f"--only expects METHOD:SEED, got {value!r}") from exc


def cmd_run(args) -> int:
    cfg = _load(args)
    only = _parse_only(args.only) if args.only else None
    if only is not None and only[0] not in sim_mod.METHODS:
        raise DataError(f"--only method {only[0]!r} not one of {sim_mod.METHODS}")
    out = _out_dir(args)
    rows = run_batch(cfg, out_dir=out, jobs=args.jobs, only=only)
    metrics_mod.write_results_csv(rows, out / "results.csv")
    write_summary_json(rows, out / "summary.json")
    failed = sum(1 for r in rows if str(r.get("status")) not in ("ok", "timeout"))
    print(out / "results.csv")
    if rows and failed == len(rows):
        raise RuntimeFailure("every (method, seed) cell failed")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plots import render_results  # matplotlib import deferred to first use

    rows = metrics_mod.read_results_csv(args.results)
    if not rows:
        raise DataError(f"{args.results} has no rows")
    out = _out_dir(args)
    paths = render_results(rows, out)
    for p in paths.values():
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="swarmsense", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        p.add_argument("--config", required=name != "plot", help="scenario config JSON")
        p.add_argument("--out", help=f"output directory (default $%s or ./out)" % OUT_ROOT_ENV)
        return p

    add("ingest", cmd_ingest, help="bin a trajectory CSV into a requirement CSV").add_argument(
        "--trajectories", help="vehicle_id,t,x,y CSV (default: config's trajectories_csv)"
    )
    p = add("generate-plans", cmd_generate_plans, help="write per-agent plan menus")
    p.add_argument("--seed", type=int, help="seed (default: first config seed)")

    p = add("optimize", cmd_optimize, help="select plans by collective learning")
    p.add_argument("--plans", required=True, help="directory of plans_agent_N.csv files")
    p.add_argument("--seed", type=int, help="tree seed fallback (default: first config seed)")

    p = add("schedule", cmd_schedule, help="detect conflicts and repair with waits/detours")
    p.add_argument("--plans", required=True)
    p.add_argument("--selection", required=True, help="selection.csv from optimize")
    p.add_argument("--seed", type=int, help="priority seed (default: first config seed)")

    p = add("simulate", cmd_simulate, help="run one (method, seed) mission")
    p.add_argument("--method", required=True, choices=sim_mod.METHODS)
    p.add_argument("--seed", type=int, help="seed (default: first config seed)")
    p.add_argument("--field-dump", type=int, default=0, metavar="STRIDE",
                   help="render the steering field to SVG every STRIDE ticks (0 = off)")
    p.add_argument("--field-drone", type=int, default=0, help="drone whose field is rendered")

    p = add("run", cmd_run, help="full batch: every (method, seed) cell")
    p.add_argument("--jobs", type=int, default=1, help="parallel seed workers")
    p.add_argument("--only", help="run a single METHOD:SEED cell")

    p = sub.add_parser("plot", help="render SVG figure panels from a results CSV")
    p.set_defaults(fn=cmd_plot)
    p.add_argument("--results", required=True, help="results.csv from run")
    p.add_argument("--out", help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DataError as exc:
        print(f"swarmsense: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RuntimeFailure as exc:
        print(f"swarmsense: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except SwarmSenseError as exc:
        print(f"swarmsense: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
