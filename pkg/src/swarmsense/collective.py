"""Decentralized plan selection over a balanced binary tree.

Agents each own a finite plan menu; the swarm's goal is to pick one plan per
agent so the summed hover vector matches the sensing requirement, measured by
the residual sum of squares between the two unit-length-scaled signals. The
optimizer sweeps the tree bottom-up each iteration (children's fresh choices
combine with the last broadcast aggregate), lets every agent best-respond, and
broadcasts the new aggregate top-down; re-selections that would worsen the
global residual are discarded, so the trace is non-increasing.

brute_force is the independent exhaustive oracle and shares nothing with
optimize beyond the residual function itself.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .env import SensingRequirement
from .errors import (
    CombinationBoundExceeded,
    DataError,
    DimensionMismatchError,
    EmptyPopulationError,
)
from .plangen import AgentPlanSet

DEFAULT_ITERATIONS = 40
BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True)
class TreeTopology:
    """Balanced binary tree over agent ids: heap-shaped positions, seeded assignment."""

    parent: dict[int, int]
    children: dict[int, tuple[int, ...]]
    levels: tuple[tuple[int, ...], ...]

    @property
    def root(self) -> int:
        return self.levels[0][0]


@dataclass
class Selection:
    """One plan index per agent plus the resulting aggregate and residual."""

    chosen: list[int]
    aggregate: np.ndarray
    rss: float
    trace: list[float] = field(default_factory=list)


def build_tree(n: int, rng: np.random.Generator | None = None) -> TreeTopology:
    """Balanced binary tree over n agents; the position assignment is a seeded permutation."""
    if n < 1:
        raise EmptyPopulationError("cannot build a tree over zero agents")
    rng = rng if rng is not None else np.random.default_rng()
    perm = [int(a) for a in rng.permutation(n)]

    parent: dict[int, int] = {}
    children: dict[int, list[int]] = {a: [] for a in perm}
    for pos in range(1, n):
        parent[perm[pos]] = perm[(pos - 1) // 2]
        children[perm[(pos - 1) // 2]].append(perm[pos])

    levels: list[tuple[int, ...]] = []
    pos = 0
    width = 1
    while pos < n:
        levels.append(tuple(perm[pos : pos + width]))
        pos += width
        width *= 2
    return TreeTopology(
        parent=parent,
        children={a: tuple(c) for a, c in children.items()},
        levels=tuple(levels),
    )


def unit_scale(v: np.ndarray) -> np.ndarray:
    """v / ||v||2, or the zero vector when ||v||2 = 0."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        return np.zeros_like(v)
    return v / n


def rss(a: np.ndarray, b: np.ndarray) -> float:
    """Residual sum of squares between the unit-scaled signals."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"length mismatch: {a.shape} vs {b.shape}")
    d = unit_scale(a) - unit_scale(b)
    return float(d @ d)


def _check_plan_sets(plan_sets: list[AgentPlanSet]) -> int:
    if not plan_sets:
        raise EmptyPopulationError("no plan sets")
    m = len(plan_sets[0].plans[0].hover) if plan_sets[0].plans else 0
    for ps in plan_sets:
        if not ps.plans:
            raise DataError(f"agent {ps.agent_id} has an empty plan set")
        for p in ps.plans:
            if len(p.hover) != m:
                raise DimensionMismatchError(f"agent {ps.agent_id}: plan length != {m}")
    return m


def optimize(
    plan_sets: list[AgentPlanSet],
    requirement: SensingRequirement,
    iterations: int = DEFAULT_ITERATIONS,
    rng: np.random.Generator | None = None,
    tree: TreeTopology | None = None,
) -> Selection:
    """Iterative bottom-up/top-down plan selection minimizing the unit-scaled residual.

    Each iteration sweeps agents leaves-first. An agent evaluates the global
    aggregate with its own contribution swapped for each plan in its menu and
    keeps the best index; a swap is committed only if it does not increase the
    global residual. The per-iteration residual trace is therefore
    non-increasing. Deterministic: ties break toward the lowest plan index and
    the sweep order is fixed by the (seeded) tree.
    """
    m = _check_plan_sets(plan_sets)
    if iterations < 1:
        raise DataError("iterations must be >= 1")
    if len(requirement.values) != m:
        raise DimensionMismatchError("requirement length does not match plans")
    n = len(plan_sets)
    tree = tree if tree is not None else build_tree(n, rng)

    target = requirement.values
    chosen = [0] * n
    aggregate = np.sum([ps.plans[0].hover for ps in plan_sets], axis=0)
    current = rss(aggregate, target)

    sweep = [a for level in reversed(tree.levels) for a in level]
    trace: list[float] = []
    for _ in range(iterations):
        for agent in sweep:
            ps = plan_sets[agent]
            base = aggregate - ps.plans[chosen[agent]].hover
            best_idx, best_rss = chosen[agent], current
            for idx, plan in enumerate(ps.plans):
                candidate = rss(base + plan.hover, target)
                if candidate < best_rss:
                    best_idx, best_rss = idx, candidate
            if best_idx != chosen[agent] and best_rss <= current:
                chosen[agent] = best_idx
                aggregate = base + ps.plans[best_idx].hover
                current = best_rss
        # top-down broadcast: refresh the aggregate exactly from the committed choices
        aggregate = np.sum([plan_sets[a].plans[chosen[a]].hover for a in range(n)], axis=0)
        current = rss(aggregate, target)
        trace.append(current)

    return Selection(chosen=chosen, aggregate=aggregate, rss=current, trace=trace)


def brute_force(plan_sets: list[AgentPlanSet], requirement: SensingRequirement) -> Selection:
    """Exhaustive minimum-residual selection; ties break to the lexicographically
    smallest index vector. Refuses above 10^6 combinations."""
    m = _check_plan_sets(plan_sets)
    if len(requirement.values) != m:
        raise DimensionMismatchError("requirement length does not match plans")
    total = 1
    for ps in plan_sets:
        total *= len(ps.plans)
        if total > BRUTE_FORCE_LIMIT:
            raise CombinationBoundExceeded(f"{total}+ combinations exceed {BRUTE_FORCE_LIMIT}")

    target = requirement.values
    best_combo: tuple[int, ...] | None = None
    best_rss = math.inf
    for combo in itertools.product(*(range(len(ps.plans)) for ps in plan_sets)):
        agg = np.sum([ps.plans[i].hover for ps, i in zip(plan_sets, combo)], axis=0)
        r = rss(agg, target)
        if r < best_rss:
            best_combo, best_rss = combo, r
    assert best_combo is not None
    aggregate = np.sum([ps.plans[i].hover for ps, i in zip(plan_sets, best_combo)], axis=0)
    return Selection(chosen=list(best_combo), aggregate=aggregate, rss=best_rss, trace=[best_rss])


def greedy_select(
    plan_sets: list[AgentPlanSet],
    requirement: SensingRequirement | None = None,
) -> Selection:
    """Each agent independently takes its cheapest plan (ties: lowest index)."""
    _check_plan_sets(plan_sets)
    chosen = []
    for ps in plan_sets:
        costs = [p.cost for p in ps.plans]
        chosen.append(costs.index(min(costs)))
    aggregate = np.sum([ps.plans[i].hover for ps, i in zip(plan_sets, chosen)], axis=0)
    r = rss(aggregate, requirement.values) if requirement is not None else float("nan")
    return Selection(chosen=chosen, aggregate=aggregate, rss=r, trace=[])


def write_selection(selection: Selection, csv_path: str | Path, json_path: str | Path | None = None) -> None:
    """Selection CSV `agent,plan_index` plus a JSON summary {rss, iterations, trace}."""
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["agent", "plan_index"])
        for agent, idx in enumerate(selection.chosen):
            writer.writerow([agent, idx])
    if json_path is not None:
        with open(json_path, "w") as f:
            json.dump(
                {"rss": selection.rss, "iterations": len(selection.trace), "trace": selection.trace},
                f,
                indent=2,
            )
            f.write("\n")


def read_selection_csv(path: str | Path) -> list[int]:
    chosen: dict[int, int] = {}
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or not {"agent", "plan_index"}.issubset(reader.fieldnames):
            raise DataError(f"{path}: expected header agent,plan_index")
        for row in reader:
            chosen[int(row["agent"])] = int(row["plan_index"])
    return [chosen[a] for a in sorted(chosen)]
