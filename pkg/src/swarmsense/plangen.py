"""Per-agent menus of candidate navigation-and-sensing plans.

Each plan is a route over grid cells with a hover duration per visited cell
and its energy cost. Routes are random samples biased toward cells with high
sensing requirement; every emitted plan fits within one battery charge.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import energy as energy_mod
from . import env as env_mod
from .errors import BatteryInfeasibleError, DataError
from .geometry import Point, dist

DEFAULT_PLANS_PER_AGENT = 16
DEFAULT_T_MIN = 10.0  # s, per-plan total hover budget window
DEFAULT_T_MAX = 60.0
DUPLICATE_RETRIES = 20


@dataclass(frozen=True)
class Plan:
    """One candidate mission: hover seconds per cell (length M) plus cost in joules.

    hover[c] > 0 exactly for the cells in route; cost is recomputable bit-for-bit
    via energy.plan_cost.
    """

    hover: np.ndarray
    route: tuple[int, ...]
    cost: float

    def __post_init__(self):
        object.__setattr__(self, "hover", np.asarray(self.hover, dtype=float))


@dataclass(frozen=True)
class AgentPlanSet:
    agent_id: int
    plans: tuple[Plan, ...]
    home: Point


def _nearest_neighbor_order(cells: list[int], env: env_mod.GridEnvironment, home: Point) -> list[int]:
    """Greedy route ordering from home; ties broken by lower cell index."""
    remaining = sorted(cells)
    pos = home
    ordered = []
    while remaining:
        best = min(remaining, key=lambda c: (dist(pos, env_mod.cell_center(env, c)), c))
        remaining.remove(best)
        ordered.append(best)
        pos = env_mod.cell_center(env, best)
    return ordered


def _draw_route(
    eligible: np.ndarray,
    weights: np.ndarray,
    length: int,
    rng: np.random.Generator,
) -> list[int]:
    """Draw `length` distinct cells, probability proportional to weight."""
    if weights.sum() > 0:
        probs = weights / weights.sum()
        chosen = rng.choice(eligible, size=length, replace=False, p=probs)
    else:
        chosen = rng.choice(eligible, size=length, replace=False)
    return [int(c) for c in chosen]


def generate_plans(
    agent_id: int,
    env: env_mod.GridEnvironment,
    spec: energy_mod.DroneSpec,
    requirement: env_mod.SensingRequirement,
    k: int = DEFAULT_PLANS_PER_AGENT,
    rng: np.random.Generator | None = None,
    l_max: int | None = None,
    t_min: float = DEFAULT_T_MIN,
    t_max: float = DEFAULT_T_MAX,
) -> AgentPlanSet:
    """Generate k battery-feasible plans for one agent.

    Per plan: draw a route length L, draw L distinct cells weighted by the
    requirement (restricted to positive-requirement cells when any exist),
    order them nearest-neighbor from the agent's home pad, then split a total
    hover budget drawn from [t_min, t_max] across the route in proportion to
    the cells' requirement shares. Budgets are scaled down when the cost would
    exceed the battery; duplicate plans are redrawn a bounded number of times.
    """
    if k < 1:
        raise DataError("k must be >= 1")
    if env.n_cells < 1:
        raise DataError("environment has no cells")
    if len(requirement.values) != env.n_cells:
        raise DataError(
            f"requirement length {len(requirement.values)} != {env.n_cells} cells"
        )
    rng = rng if rng is not None else np.random.default_rng()
    home = env.home_pads[agent_id % len(env.home_pads)]
    e_batt = energy_mod.battery_energy(spec)
    power = energy_mod.nominal_power(spec)

    values = requirement.values
    positive = np.flatnonzero(values > 0)
    eligible = positive if positive.size else np.arange(env.n_cells)
    weights = values[eligible]
    max_len = min(int(l_max) if l_max else eligible.size, eligible.size)

    plans: list[Plan] = []
    seen: set[bytes] = set()
    for _ in range(k):
        plan = None
        for _attempt in range(DUPLICATE_RETRIES + 1):
            length = int(rng.integers(1, max_len + 1))
            route = _nearest_neighbor_order(_draw_route(eligible, weights, length, rng), env, home)
            t_travel = energy_mod.travel_time(route, env, spec, home)
            hover_budget = e_batt / power - spec.travel_power_factor * t_travel
            if hover_budget <= 0:
                continue  # route alone drains the battery; redraw
            budget = min(float(rng.uniform(t_min, t_max)), hover_budget)
            shares = values[route]
            if shares.sum() > 0:
                shares = shares / shares.sum()
            else:
                shares = np.full(len(route), 1.0 / len(route))
            hover = np.zeros(env.n_cells)
            hover[route] = shares * budget
            cost = energy_mod.plan_cost(route, hover, env, spec, home)
            key = hover.tobytes() + bytes(route)
            candidate = Plan(hover=hover, route=tuple(route), cost=cost)
            if key not in seen:
                seen.add(key)
                plan = candidate
                break
            plan = candidate  # duplicate kept if retries exhausted
        if plan is None:
            raise BatteryInfeasibleError(agent_id)
        plans.append(plan)
    return AgentPlanSet(agent_id=agent_id, plans=tuple(plans), home=home)


def write_plan_set_csv(plan_set: AgentPlanSet, path: str | Path) -> None:
    """Export one agent's menu: rows `plan,cell,hover_s,cost_J` (cost repeated per plan)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["plan", "cell", "hover_s", "cost_J"])
        for p_idx, plan in enumerate(plan_set.plans):
            for cell in plan.route:
                writer.writerow([p_idx, cell, repr(float(plan.hover[cell])), repr(plan.cost)])


def read_plan_set_csv(
    path: str | Path,
    agent_id: int,
    env: env_mod.GridEnvironment,
) -> AgentPlanSet:
    """Inverse of write_plan_set_csv. Route order is the row order within a plan."""
    rows: dict[int, list[tuple[int, float, float]]] = {}
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        expected = {"plan", "cell", "hover_s", "cost_J"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise DataError(f"{path}: expected header plan,cell,hover_s,cost_J")
        for row in reader:
            rows.setdefault(int(row["plan"]), []).append(
                (int(row["cell"]), float(row["hover_s"]), float(row["cost_J"]))
            )
    plans = []
    for p_idx in sorted(rows):
        route = tuple(cell for cell, _, _ in rows[p_idx])
        hover = np.zeros(env.n_cells)
        for cell, h, _ in rows[p_idx]:
            hover[cell] = h
        cost = rows[p_idx][0][2]
        plans.append(Plan(hover=hover, route=route, cost=cost))
    home = env.home_pads[agent_id % len(env.home_pads)]
    return AgentPlanSet(agent_id=agent_id, plans=tuple(plans), home=home)
