"""End-to-end experiment pipeline: plans -> selection -> (schedule) -> sim -> metrics.

Every (method, seed) cell is a pure function of the config: plan menus and
priorities derive from the seed, the tree from tree_seed (or the seed), so a
batch is reproducible cell by cell. Methods share the seed's plan menus; the
EPOS-family methods also share one optimized selection per seed, while
Greedy-PF selects per-agent cheapest plans.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import collective, env as env_mod, metrics as metrics_mod, sim as sim_mod
from .config import ScenarioConfig
from .errors import SwarmSenseError
from .pfield import PriorityAssignment
from .plangen import AgentPlanSet, generate_plans
from .scheduling import (
    CollisionEvent,
    TimedPath,
    assign_priorities,
    build_timed_path,
    detect_collisions,
    schedule_ca,
    write_events_csv,
)
from .seeding import rng_for


@dataclass
class CellResult:
    method: str
    seed: int
    report: sim_mod.MissionReport
    metrics: metrics_mod.Metrics
    events: list[CollisionEvent]
    selection: collective.Selection


def generate_all_plans(
    cfg: ScenarioConfig,
    environment: env_mod.GridEnvironment,
    requirement: env_mod.SensingRequirement,
    seed: int,
) -> list[AgentPlanSet]:
    return [
        generate_plans(
            i,
            environment,
            cfg.spec,
            requirement,
            k=cfg.plans_per_agent,
            rng=rng_for(seed, "plans", i),
            l_max=cfg.l_max,
            t_min=cfg.t_min,
            t_max=cfg.t_max,
        )
        for i in range(cfg.n_drones)
    ]


def select_plans(
    cfg: ScenarioConfig,
    plan_sets: list[AgentPlanSet],
    requirement: env_mod.SensingRequirement,
    seed: int,
    method: str,
) -> collective.Selection:
    if method == sim_mod.METHOD_GREEDY_PF:
        return collective.greedy_select(plan_sets, requirement)
    tree_seed = cfg.tree_seed if cfg.tree_seed is not None else seed
    return collective.optimize(
        plan_sets, requirement, iterations=cfg.iterations, rng=rng_for(tree_seed, "tree")
    )


def planned_paths(
    plan_sets: list[AgentPlanSet],
    selection: collective.Selection,
    environment: env_mod.GridEnvironment,
    cfg: ScenarioConfig,
) -> list[TimedPath]:
    paths = []
    for i, ps in enumerate(plan_sets):
        plan = ps.plans[selection.chosen[i]]
        paths.append(build_timed_path(i, plan.route, plan.hover, environment, cfg.spec, ps.home))
    return paths


def run_cell(
    cfg: ScenarioConfig,
    method: str,
    seed: int,
    environment: env_mod.GridEnvironment | None = None,
    requirement: env_mod.SensingRequirement | None = None,
    plan_sets: list[AgentPlanSet] | None = None,
    priorities: PriorityAssignment | None = None,
    tick_hook=None,
) -> CellResult:
    """One deterministic (method, seed) experiment."""
    environment = environment if environment is not None else cfg.build_env()
    requirement = requirement if requirement is not None else cfg.load_requirement(environment)
    if plan_sets is None:
        plan_sets = generate_all_plans(cfg, environment, requirement, seed)
    if priorities is None:
        priorities = assign_priorities(cfg.n_drones, rng_for(seed, "priorities"))

    selection = select_plans(cfg, plan_sets, requirement, seed, method)
    paths = planned_paths(plan_sets, selection, environment, cfg)
    events = detect_collisions(paths, cfg.field_params())

    schedule = None
    if method == sim_mod.METHOD_EPOS_CA:
        schedule = schedule_ca(paths, priorities, cfg.field_params(), environment)

    scenario = sim_mod.Scenario(
        env=environment,
        spec=cfg.spec,
        requirement=requirement,
        n_drones=cfg.n_drones,
        method=method,
        seed=seed,
        plan_sets=tuple(plan_sets),
        dt=cfg.dt,
        params=cfg.field_params(),
        risk_radius=cfg.risk_radius,
        time_cap=cfg.time_cap,
        risk_include_walls=cfg.risk_include_walls,
    )
    report = sim_mod.run(scenario, selection, schedule=schedule, priorities=priorities, tick_hook=tick_hook)
    cell_metrics = metrics_mod.compute_metrics(report, requirement, events)
    return CellResult(method, seed, report, cell_metrics, events, selection)


def _write_cell_logs(result: CellResult, out_dir: Path) -> None:
    run_dir = out_dir / "runs" / f"{result.method}_seed{result.seed}"
    run_dir.mkdir(parents=True, exist_ok=True)
    sim_mod.write_trajectory_csv(result.report, run_dir / "trajectory.csv")
    sim_mod.write_report_json(result.report, run_dir / "report.json")
    write_events_csv(result.events, run_dir / "events.csv")


def _run_seed(
    cfg: ScenarioConfig,
    seed: int,
    methods: tuple[str, ...],
    out_dir: str | None,
) -> list[dict]:
    """All methods for one seed; shares plan menus, priorities, and the optimized selection."""
    environment = cfg.build_env()
    requirement = cfg.load_requirement(environment)
    plan_sets = generate_all_plans(cfg, environment, requirement, seed)
    priorities = assign_priorities(cfg.n_drones, rng_for(seed, "priorities"))

    rows = []
    for method in methods:
        try:
            result = run_cell(
                cfg, method, seed,
                environment=environment,
                requirement=requirement,
                plan_sets=plan_sets,
                priorities=priorities,
            )
            row = metrics_mod.metrics_row(method, seed, result.metrics)
            if out_dir is not None:
                _write_cell_logs(result, Path(out_dir))
        except SwarmSenseError as exc:
            row = {
                "method": method,
                "seed": seed,
                "energy_J": "",
                "risk_ratio": "",
                "mismatch_rss": "",
                "cross": "",
                "parallel": "",
                "dest_occupied": "",
                "status": f"error:{type(exc).__name__}",
            }
        rows.append(row)
    return rows


def run_batch(
    cfg: ScenarioConfig,
    out_dir: str | Path | None = None,
    jobs: int = 1,
    only: tuple[str, int] | None = None,
) -> list[dict]:
    """All (method, seed) cells of a config; returns results rows in config order."""
    out_str = str(out_dir) if out_dir is not None else None
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)

    if only is not None:
        method, seed = only
        return _run_seed(cfg, seed, (method,), out_str)

    by_seed: dict[int, list[dict]] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                seed: pool.submit(_run_seed, cfg, seed, tuple(cfg.methods), out_str)
                for seed in cfg.seeds
            }
            for seed, fut in futures.items():
                by_seed[seed] = fut.result()
    else:
        for seed in cfg.seeds:
            by_seed[seed] = _run_seed(cfg, seed, tuple(cfg.methods), out_str)

    # deterministic merge: config method order, then config seed order
    rows_by_key = {
        (row["method"], row["seed"]): row for rows in by_seed.values() for row in rows
    }
    ordered = []
    for method in cfg.methods:
        for seed in cfg.seeds:
            ordered.append(rows_by_key[(method, seed)])
    return ordered


def write_summary_json(rows: list[dict], path: str | Path) -> None:
    ok_rows = [r for r in rows if str(r.get("status")) == "ok"]
    summary = {
        "cells": len(rows),
        "failed": len(rows) - len(ok_rows),
        "methods": metrics_mod.aggregate(ok_rows) if ok_rows else [],
    }
    with open(path, "w") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")
