"""Time-stepped execution of selected plans under one of the four methods.

EPOS follows the planned straight-line schedules with no avoidance; EPOS-CA
follows repaired schedules (waits and detours); EPOS-PF and Greedy-PF steer by
the potential field each tick at constant cruise speed. One rule produces all
the sensing side effects: a drone accrues sensing to whatever cell is beneath
it while hovering or waiting, and hover timers run even when the drone has
been pushed off its cell.

Energy is charged to integrate exactly: movement at travel power times the
distance actually flown over cruise speed, hover at nominal power for the time
actually hovered, so an unobstructed mission's energy equals its plan cost to
float precision.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import energy as energy_mod
from . import env as env_mod
from .collective import Selection
from .errors import DataError
from .geometry import Point, dist, dist_to_segment
from .pfield import FieldParams, PriorityAssignment, total_vector
from .plangen import AgentPlanSet
from .scheduling import TimedPath, assign_priorities, build_timed_path
from .seeding import rng_for

GROUNDED, TRAVELING, HOVERING, WAITING, RETURNING, DONE = range(6)
PHASE_NAMES = ("grounded", "traveling", "hovering", "waiting", "returning", "done")

METHOD_EPOS = "EPOS"
METHOD_EPOS_CA = "EPOS-CA"
METHOD_EPOS_PF = "EPOS-PF"
METHOD_GREEDY_PF = "Greedy-PF"
METHODS = (METHOD_EPOS, METHOD_EPOS_CA, METHOD_EPOS_PF, METHOD_GREEDY_PF)
PF_METHODS = frozenset({METHOD_EPOS_PF, METHOD_GREEDY_PF})

DEFAULT_DT = 0.1
DEFAULT_RISK_RADIUS = 0.5
DEFAULT_TIME_CAP = 900.0
COINCIDENT_EPS = 1e-9
NUDGE = 5e-4  # m, half of the deterministic separation applied to coincident drones


@dataclass(frozen=True)
class Scenario:
    env: env_mod.GridEnvironment
    spec: energy_mod.DroneSpec
    requirement: env_mod.SensingRequirement
    n_drones: int
    method: str
    seed: int
    plan_sets: tuple[AgentPlanSet, ...]
    dt: float = DEFAULT_DT
    params: FieldParams = field(default_factory=FieldParams)
    risk_radius: float = DEFAULT_RISK_RADIUS
    time_cap: float = DEFAULT_TIME_CAP
    risk_include_walls: bool = False

    def __post_init__(self):
        if self.dt <= 0:
            raise DataError("dt must be positive")
        if self.risk_radius < self.params.d_min:
            raise DataError("risk radius must be at least d_min")
        if self.method not in METHODS:
            raise DataError(f"unknown method {self.method!r}; expected one of {METHODS}")


@dataclass(frozen=True)
class ProximityEvent:
    """Onset of a sub-d_min separation between two drones."""

    time: float
    drones: tuple[int, int]
    location: Point


@dataclass
class MissionReport:
    method: str
    seed: int
    times: np.ndarray  # (T,)
    positions: np.ndarray  # (T, N, 2)
    phases: np.ndarray  # (T, N)
    min_dist: np.ndarray  # (T, N) distance to nearest airborne drone (and wall, if enabled)
    energy_series: np.ndarray  # (T, N) cumulative joules
    energy_per_drone: np.ndarray  # (N,)
    energy: float
    sensed: np.ndarray  # (M,) hover-seconds per cell
    total_distance: float
    risk_distance: float
    events: list[ProximityEvent]
    sub_dmin_events: int
    complete: bool
    wall_clock: float


def risk_distance(positions: np.ndarray, min_dist: np.ndarray, rho: float) -> float:
    """Path length flown while within rho of another drone (or wall, if tracked).

    positions: (T, N, 2) tick states; min_dist: (T, N). Each tick's per-drone
    displacement counts when that drone's min distance at the moved-to state
    is within rho.
    """
    if len(positions) < 2:
        return 0.0
    disp = np.linalg.norm(np.diff(positions, axis=0), axis=2)  # (T-1, N)
    risky = min_dist[1:] <= rho
    return float(disp[risky].sum())


class _PFDrone:
    __slots__ = ("id", "pos", "phase", "queue", "qi", "hover_remaining", "energy", "prev", "home")

    def __init__(self, drone_id: int, home: Point, queue: list[tuple[Point, int | None, float]]):
        self.id = drone_id
        self.pos = home
        self.home = home
        self.queue = queue
        self.qi = 0
        self.phase = TRAVELING if queue and queue[0][1] is not None else RETURNING
        self.hover_remaining = 0.0
        self.energy = 0.0
        self.prev: dict = {}

    def advance_queue(self):
        self.qi += 1
        if self.qi >= len(self.queue):
            self.phase = DONE
        else:
            self.phase = RETURNING if self.queue[self.qi][1] is None else TRAVELING


class _PathDrone:
    __slots__ = ("id", "intervals", "end_time", "end_pos", "idx", "energy")

    def __init__(self, drone_id: int, intervals: list, end_time: float, end_pos: Point):
        self.id = drone_id
        self.intervals = intervals  # (t0, t1, phase, p0, p1) sorted, contiguous
        self.end_time = end_time
        self.end_pos = end_pos
        self.idx = 0
        self.energy = 0.0

    def state_at(self, t: float) -> tuple[Point, int]:
        if t >= self.end_time:
            return self.end_pos, DONE
        while self.idx < len(self.intervals) and self.intervals[self.idx][1] <= t:
            self.idx += 1
        if self.idx >= len(self.intervals):
            return self.end_pos, DONE
        t0, t1, phase, p0, p1 = self.intervals[self.idx]
        if phase == TRAVELING or phase == RETURNING:
            frac = (t - t0) / (t1 - t0)
            return (p0[0] + (p1[0] - p0[0]) * frac, p0[1] + (p1[1] - p0[1]) * frac), phase
        return p0, phase


def _path_intervals(path: TimedPath, env: env_mod.GridEnvironment) -> list:
    out = []
    last_leg_depart = max((l.depart for l in path.legs), default=-1.0)
    for l in path.legs:
        phase = RETURNING if l.depart == last_leg_depart else TRAVELING
        out.append((l.depart, l.arrive, phase, l.start, l.end))
    for h in path.hovers:
        if h.end > h.start:
            center = env_mod.cell_center(env, h.cell)
            out.append((h.start, h.end, HOVERING, center, center))
    for w in path.waits:
        if w.end > w.start:
            out.append((w.start, w.end, WAITING, w.pos, w.pos))
    out.sort(key=lambda iv: iv[0])
    return out


def _plan_queue(plan, env: env_mod.GridEnvironment, home: Point) -> list:
    queue = [(env_mod.cell_center(env, c), c, float(plan.hover[c])) for c in plan.route]
    queue.append((home, None, 0.0))
    return queue


def run(
    scenario: Scenario,
    selection: Selection,
    schedule: list[TimedPath] | None = None,
    priorities: PriorityAssignment | None = None,
    tick_hook=None,
) -> MissionReport:
    """Execute one mission and account trajectories, sensing, energy, and risk.

    tick_hook, when given, is called after every committed tick as
    tick_hook(t, states, priorities) with states = [(id, pos, phase, dest)];
    dest is None once a drone is done. Debugging/visualisation only.
    """
    sc = scenario
    n = sc.n_drones
    if len(selection.chosen) != n or len(sc.plan_sets) != n:
        raise DataError("selection/plan sets do not match the drone count")
    if (schedule is not None) != (sc.method == METHOD_EPOS_CA):
        raise DataError("a schedule is required exactly for EPOS-CA")
    if priorities is None:
        priorities = assign_priorities(n, rng_for(sc.seed, "priorities"))

    t_start = time.perf_counter()
    env = sc.env
    spec = sc.spec
    power = energy_mod.nominal_power(spec)
    tpf = spec.travel_power_factor
    v = spec.cruise_speed
    dt = sc.dt
    eps = sc.params.arrival_eps
    plans = [sc.plan_sets[i].plans[selection.chosen[i]] for i in range(n)]
    homes = [sc.plan_sets[i].home for i in range(n)]

    pf_mode = sc.method in PF_METHODS
    if pf_mode:
        drones = [_PFDrone(i, homes[i], _plan_queue(plans[i], env, homes[i])) for i in range(n)]
    elif sc.method == METHOD_EPOS_CA:
        paths = sorted(schedule, key=lambda p: p.drone_id)
        drones = [
            _PathDrone(p.drone_id, _path_intervals(p, env), p.end_time(), homes[p.drone_id])
            for p in paths
        ]
    else:  # EPOS: planned straight-line paths
        paths = [
            build_timed_path(i, plans[i].route, plans[i].hover, env, spec, homes[i])
            for i in range(n)
        ]
        drones = [
            _PathDrone(i, _path_intervals(paths[i], env), paths[i].end_time(), homes[i])
            for i in range(n)
        ]

    sensed = np.zeros(env.n_cells)
    times = [0.0]
    pos_log: list[list[Point]] = []
    phase_log: list[list[int]] = []
    energy_log: list[list[float]] = []
    mind_log: list[list[float]] = []
    events: list[ProximityEvent] = []
    below: set[tuple[int, int]] = set()

    if pf_mode:
        cur_pos = [d.pos for d in drones]
        cur_phase = [d.phase for d in drones]
    else:
        states = [d.state_at(0.0) for d in drones]
        cur_pos = [s[0] for s in states]
        cur_phase = [s[1] for s in states]

    def log_state(t: float):
        pos_log.append(list(cur_pos))
        phase_log.append(list(cur_phase))
        energy_log.append([d.energy for d in drones])
        mind = []
        for i in range(n):
            if cur_phase[i] == DONE:
                mind.append(math.inf)
                continue
            m = math.inf
            for j in range(n):
                if j != i and cur_phase[j] != DONE:
                    m = min(m, dist(cur_pos[i], cur_pos[j]))
            if sc.risk_include_walls:
                for seg in env.walls:
                    m = min(m, dist_to_segment(cur_pos[i], seg))
            mind.append(m)
        mind_log.append(mind)
        # sub-d_min onsets between airborne drones
        for i in range(n):
            if cur_phase[i] == DONE:
                continue
            for j in range(i + 1, n):
                if cur_phase[j] == DONE:
                    continue
                d = dist(cur_pos[i], cur_pos[j])
                if d < sc.params.d_min:
                    if (i, j) not in below:
                        below.add((i, j))
                        mid = ((cur_pos[i][0] + cur_pos[j][0]) / 2, (cur_pos[i][1] + cur_pos[j][1]) / 2)
                        events.append(ProximityEvent(t, (i, j), mid))
                else:
                    below.discard((i, j))

    def hook_states():
        states = []
        for d in drones:
            if cur_phase[d.id] == DONE:
                states.append((d.id, cur_pos[d.id], DONE, None))
            elif pf_mode:
                states.append((d.id, cur_pos[d.id], cur_phase[d.id], d.queue[d.qi][0]))
            else:
                idx = min(d.idx, len(d.intervals) - 1)
                states.append((d.id, cur_pos[d.id], cur_phase[d.id], d.intervals[idx][4]))
        return states

    log_state(0.0)
    if tick_hook is not None:
        tick_hook(0.0, hook_states(), priorities)

    t = 0.0
    while t < sc.time_cap - 1e-9 and any(p != DONE for p in cur_phase):
        if pf_mode:
            # deterministic nudge of coincident airborne drones before field evaluation
            for i in range(n):
                if cur_phase[i] == DONE:
                    continue
                for j in range(i + 1, n):
                    if cur_phase[j] != DONE and dist(cur_pos[i], cur_pos[j]) < COINCIDENT_EPS:
                        drones[i].pos = (drones[i].pos[0] - NUDGE, drones[i].pos[1])
                        drones[j].pos = (drones[j].pos[0] + NUDGE, drones[j].pos[1])
                        cur_pos[i], cur_pos[j] = drones[i].pos, drones[j].pos

            snapshot = [(d.id, d.pos) for d in drones if d.phase != DONE]
            new_pos = list(cur_pos)
            for d in drones:
                if d.phase == DONE:
                    continue
                dest_point, dest_cell, hover_s = d.queue[d.qi]
                # sensing accrues from the state at tick start
                if d.phase == HOVERING:
                    cell = env_mod.cell_at(env, d.pos)
                    if cell is not None:
                        sensed[cell] += dt

                arrived = False
                disp = 0.0
                pos = d.pos
                if d.phase in (TRAVELING, RETURNING) and dist(pos, dest_point) <= eps:
                    disp = dist(pos, dest_point)
                    pos = dest_point
                    arrived = True
                else:
                    neighbors = [(oid, opos) for oid, opos in snapshot if oid != d.id]
                    vec, comps = total_vector(
                        d.pos, dest_point, d.id, neighbors, env.walls,
                        sc.params, priorities, d.prev, sc.seed,
                    )
                    d.prev = comps
                    vnorm = math.hypot(vec[0], vec[1])
                    if vnorm > 1e-12:
                        step = (vec[0] * v * dt / vnorm, vec[1] * v * dt / vnorm)
                        pos = (d.pos[0] + step[0], d.pos[1] + step[1])
                        if d.phase in (TRAVELING, RETURNING) and dist(pos, dest_point) <= eps:
                            pos = dest_point
                            arrived = True
                        disp = dist(d.pos, pos)

                if disp > 0.0:
                    d.energy += power * tpf * disp / v
                elif d.phase == HOVERING:
                    d.energy += power * min(dt, max(d.hover_remaining, 0.0))
                else:
                    d.energy += power * dt

                if d.phase == HOVERING:
                    d.hover_remaining -= dt
                    if d.hover_remaining <= 1e-9:
                        d.advance_queue()
                elif arrived:
                    if dest_cell is None:
                        d.phase = DONE
                    else:
                        d.phase = HOVERING
                        d.hover_remaining = hover_s
                new_pos[d.id] = pos
                d.pos = pos
            cur_pos = new_pos
            cur_phase = [d.phase for d in drones]
        else:
            t_new = t + dt
            for d in drones:
                # exact overlap of [t, t_new) with each schedule interval
                for t0, t1, phase, _, _ in d.intervals:
                    if t1 <= t or t0 >= t_new:
                        continue
                    overlap = min(t1, t_new) - max(t0, t)
                    rate = power * tpf if phase in (TRAVELING, RETURNING) else power
                    d.energy += rate * overlap
                if cur_phase[d.id] in (HOVERING, WAITING):
                    cell = env_mod.cell_at(env, cur_pos[d.id])
                    if cell is not None:
                        sensed[cell] += dt
            states = [d.state_at(t_new) for d in drones]
            cur_pos = [s[0] for s in states]
            cur_phase = [s[1] for s in states]

        t += dt
        times.append(t)
        log_state(t)
        if tick_hook is not None:
            tick_hook(t, hook_states(), priorities)

    complete = all(p == DONE for p in cur_phase)
    positions = np.array(pos_log)
    phases = np.array(phase_log, dtype=np.int8)
    min_dist = np.array(mind_log)
    energy_series = np.array(energy_log)
    energy_per_drone = energy_series[-1].copy()
    disp = np.linalg.norm(np.diff(positions, axis=0), axis=2) if len(positions) > 1 else np.zeros((0, n))
    total_d = float(disp.sum())
    d_r = risk_distance(positions, min_dist, sc.risk_radius)

    return MissionReport(
        method=sc.method,
        seed=sc.seed,
        times=np.array(times),
        positions=positions,
        phases=phases,
        min_dist=min_dist,
        energy_series=energy_series,
        energy_per_drone=energy_per_drone,
        energy=float(energy_per_drone.sum()),
        sensed=sensed,
        total_distance=total_d,
        risk_distance=d_r,
        events=events,
        sub_dmin_events=len(events),
        complete=complete,
        wall_clock=time.perf_counter() - t_start,
    )


def write_trajectory_csv(report: MissionReport, path: str | Path) -> None:
    """Tick log: t,drone,x,y,phase,energy_J,min_dist_m."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t", "drone", "x", "y", "phase", "energy_J", "min_dist_m"])
        for k, t in enumerate(report.times):
            for i in range(report.positions.shape[1]):
                writer.writerow(
                    [
                        repr(float(t)),
                        i,
                        repr(float(report.positions[k, i, 0])),
                        repr(float(report.positions[k, i, 1])),
                        PHASE_NAMES[report.phases[k, i]],
                        repr(float(report.energy_series[k, i])),
                        repr(float(report.min_dist[k, i])),
                    ]
                )


def report_summary(report: MissionReport) -> dict:
    return {
        "method": report.method,
        "seed": report.seed,
        "energy_J": report.energy,
        "energy_per_drone_J": [float(e) for e in report.energy_per_drone],
        "total_distance_m": report.total_distance,
        "risk_distance_m": report.risk_distance,
        "sensed_s": [float(s) for s in report.sensed],
        "sub_dmin_events": report.sub_dmin_events,
        "complete": report.complete,
        "duration_s": float(report.times[-1]),
        "wall_clock_s": report.wall_clock,
    }


def write_report_json(report: MissionReport, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(report_summary(report), f, indent=2)
        f.write("\n")
