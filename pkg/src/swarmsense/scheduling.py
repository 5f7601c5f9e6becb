"""Timed straight-line paths, collision classification, and the wait/redirect scheduler.

Three conflict classes are detected on planned paths: cross (non-parallel legs
passing within d_min during overlapping traversal windows), parallel (head-on
legs within 5 degrees of anti-parallel, laterally closer than d_min, and
closing), and destination-occupied (arriving at a cell someone else is hovering
at). The repair scheduler delays or detours the lower-priority drone of the
earliest event and re-detects until clean or a cap is hit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import energy as energy_mod
from . import env as env_mod
from .errors import DataError, UnresolvedScheduleError
from .geometry import (
    Point,
    cross as cross2d,
    dist,
    dist_to_segment,
    lerp,
    scale,
    sub,
    unit,
)
from .pfield import FieldParams, PriorityAssignment

PARALLEL_COS = -0.996  # within 5 degrees of anti-parallel
WAIT_GRANULARITY = 0.5  # s
REPAIR_CAP = 100

KIND_CROSS = "cross"
KIND_PARALLEL = "parallel"
KIND_DEST_OCCUPIED = "destination_occupied"


@dataclass(frozen=True)
class Leg:
    start: Point
    end: Point
    depart: float
    arrive: float

    @property
    def speed(self) -> float:
        return dist(self.start, self.end) / (self.arrive - self.depart)

    def position(self, t: float) -> Point:
        return lerp(self.start, self.end, (t - self.depart) / (self.arrive - self.depart))

    def velocity(self) -> Point:
        return scale(sub(self.end, self.start), 1.0 / (self.arrive - self.depart))


@dataclass(frozen=True)
class Hover:
    cell: int
    start: float
    end: float


@dataclass(frozen=True)
class Wait:
    pos: Point
    cell: int | None
    start: float
    end: float


@dataclass(frozen=True)
class TimedPath:
    drone_id: int
    legs: tuple[Leg, ...]
    hovers: tuple[Hover, ...]
    waits: tuple[Wait, ...] = ()

    def end_time(self) -> float:
        times = [l.arrive for l in self.legs] + [h.end for h in self.hovers]
        times += [w.end for w in self.waits]
        return max(times) if times else 0.0


@dataclass(frozen=True)
class CollisionEvent:
    kind: str
    drones: tuple[int, int]
    time: float
    location: Point
    # leg index per drone in `drones` order; -1 marks a hovering participant
    leg_index: tuple[int, int] = (-1, -1)


def build_timed_path(
    drone_id: int,
    route: tuple[int, ...],
    hover: np.ndarray,
    env: env_mod.GridEnvironment,
    spec: energy_mod.DroneSpec,
    home: Point,
) -> TimedPath:
    """Straight-line schedule home -> route cells (hovering at each) -> home."""
    legs: list[Leg] = []
    hovers: list[Hover] = []
    t = 0.0
    pos = home
    for cell in route:
        target = env_mod.cell_center(env, cell)
        travel = energy_mod.leg_time(pos, target, spec)
        if travel > 0:
            legs.append(Leg(pos, target, t, t + travel))
            t += travel
        hovers.append(Hover(cell, t, t + float(hover[cell])))
        t += float(hover[cell])
        pos = target
    if route:
        travel = energy_mod.leg_time(pos, home, spec)
        if travel > 0:
            legs.append(Leg(pos, home, t, t + travel))
    return TimedPath(drone_id=drone_id, legs=tuple(legs), hovers=tuple(hovers))


def path_energy(path: TimedPath, spec: energy_mod.DroneSpec) -> float:
    """Energy to execute the schedule: hover power for hovers and waits, travel power for legs."""
    p = energy_mod.nominal_power(spec)
    hover_s = sum(h.end - h.start for h in path.hovers) + sum(w.end - w.start for w in path.waits)
    leg_s = sum(l.arrive - l.depart for l in path.legs)
    return p * hover_s + p * spec.travel_power_factor * leg_s


def assign_priorities(n: int, rng: np.random.Generator | None = None) -> PriorityAssignment:
    """Seeded permutation of the ladder {e^(k/2)}, k = 0..n-1; walls get e^n.

    Half-integer exponents keep the repulsion radii strictly ordered
    (0.25, 0.375, 0.5, ... at the default d_min) but below the cell spacing of
    the default arena; with whole-integer exponents the top radii reach the
    arena's half-height and hovering drones block their neighbours'
    destination cells outright.
    """
    if n < 1:
        raise DataError("need at least one drone")
    rng = rng if rng is not None else np.random.default_rng()
    ranks = rng.permutation(n)
    return PriorityAssignment(
        priority={i: math.exp(int(ranks[i]) / 2.0) for i in range(n)},
        wall_priority=math.exp(n),
    )


def _closest_approach(
    la: Leg, lb: Leg, t0: float, t1: float
) -> tuple[float, float, Point]:
    """(time, distance, midpoint) of the closest approach within [t0, t1]."""
    r0 = sub(la.position(t0), lb.position(t0))
    vr = sub(la.velocity(), lb.velocity())
    vv = vr[0] * vr[0] + vr[1] * vr[1]
    if vv == 0.0:
        t_star = t0
    else:
        t_star = t0 - (r0[0] * vr[0] + r0[1] * vr[1]) / vv
        t_star = min(t1, max(t0, t_star))
    pa, pb = la.position(t_star), lb.position(t_star)
    return t_star, dist(pa, pb), lerp(pa, pb, 0.5)


def _leg_pair_event(
    a_id: int, b_id: int, ia: int, ib: int, la: Leg, lb: Leg, d_min: float
) -> CollisionEvent | None:
    t0, t1 = max(la.depart, lb.depart), min(la.arrive, lb.arrive)
    if t1 <= t0:
        return None
    ua, ub = unit(sub(la.end, la.start)), unit(sub(lb.end, lb.start))
    cos_dir = ua[0] * ub[0] + ua[1] * ub[1]
    r0 = sub(la.position(t0), lb.position(t0))
    vr = sub(la.velocity(), lb.velocity())
    closing = (r0[0] * vr[0] + r0[1] * vr[1]) < 0.0

    if cos_dir < PARALLEL_COS:
        lateral = abs(cross2d(sub(lb.start, la.start), ua))
        if lateral < d_min and closing:
            t_star, _, mid = _closest_approach(la, lb, t0, t1)
            return CollisionEvent(KIND_PARALLEL, (a_id, b_id), t_star, mid, (ia, ib))
        return None

    t_star, d_star, mid = _closest_approach(la, lb, t0, t1)
    if d_star < d_min:
        return CollisionEvent(KIND_CROSS, (a_id, b_id), t_star, mid, (ia, ib))
    return None


def _arrival_cells(path: TimedPath) -> dict[int, int]:
    """leg index -> cell the leg arrives at (legs followed by one of the path's hovers)."""
    out = {}
    for i, leg in enumerate(path.legs):
        for h in path.hovers:
            if math.isclose(h.start, leg.arrive, abs_tol=1e-9):
                out[i] = h.cell
                break
    return out


def _occupancies(path: TimedPath) -> list[tuple[int, float, float]]:
    occ = [(h.cell, h.start, h.end) for h in path.hovers]
    occ += [(w.cell, w.start, w.end) for w in path.waits if w.cell is not None]
    return occ


def detect_collisions(paths: list[TimedPath], params: FieldParams) -> list[CollisionEvent]:
    """Pairwise classification of planned-path conflicts, earliest first."""
    events: list[CollisionEvent] = []
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            pa, pb = paths[i], paths[j]
            for ia, la in enumerate(pa.legs):
                for ib, lb in enumerate(pb.legs):
                    ev = _leg_pair_event(pa.drone_id, pb.drone_id, ia, ib, la, lb, params.d_min)
                    if ev is not None:
                        events.append(ev)
            # arrivals of one drone into cells the other occupies
            for arriving, occupying in ((pa, pb), (pb, pa)):
                cells = _arrival_cells(arriving)
                occ = _occupancies(occupying)
                for leg_idx, cell in cells.items():
                    t_arr = arriving.legs[leg_idx].arrive
                    for o_cell, o_start, o_end in occ:
                        if o_cell == cell and o_start <= t_arr <= o_end:
                            events.append(
                                CollisionEvent(
                                    KIND_DEST_OCCUPIED,
                                    (arriving.drone_id, occupying.drone_id),
                                    t_arr,
                                    arriving.legs[leg_idx].end,
                                    (leg_idx, -1),
                                )
                            )
                            break
    events.sort(key=lambda e: (e.time, e.drones, e.kind))
    return events


def _shift_from(path: TimedPath, t_from: float, delta: float) -> TimedPath:
    """Shift every segment starting at or after t_from by delta seconds."""

    def sh(t):
        return t + delta if t >= t_from - 1e-12 else t

    return TimedPath(
        drone_id=path.drone_id,
        legs=tuple(Leg(l.start, l.end, sh(l.depart), sh(l.arrive)) for l in path.legs),
        hovers=tuple(Hover(h.cell, sh(h.start), sh(h.end)) for h in path.hovers),
        waits=tuple(Wait(w.pos, w.cell, sh(w.start), sh(w.end)) for w in path.waits),
    )


def _insert_wait(path: TimedPath, leg_idx: int, duration: float, env: env_mod.GridEnvironment) -> TimedPath:
    """Hover-in-place wait at the leg's start, delaying everything downstream."""
    leg = path.legs[leg_idx]
    shifted = _shift_from(path, leg.depart, duration)
    wait = Wait(leg.start, env_mod.cell_at(env, leg.start), leg.depart, leg.depart + duration)
    return replace(shifted, waits=tuple(sorted(shifted.waits + (wait,), key=lambda w: w.start)))


def _detour(path: TimedPath, leg_idx: int, offset: float, env: env_mod.GridEnvironment) -> TimedPath:
    """Split a leg through a waypoint offset perpendicular from its midpoint.

    The side farther from the arena's nearest wall is chosen. Downstream times
    shift by the extra travel time at the leg's own speed.
    """
    leg = path.legs[leg_idx]
    mid = lerp(leg.start, leg.end, 0.5)
    direction = unit(sub(leg.end, leg.start))
    normal = (-direction[1], direction[0])
    candidates = [
        (mid[0] + normal[0] * offset, mid[1] + normal[1] * offset),
        (mid[0] - normal[0] * offset, mid[1] - normal[1] * offset),
    ]
    waypoint = max(candidates, key=lambda wp: min(dist_to_segment(wp, seg) for seg in env.walls))

    speed = leg.speed
    t_wp = leg.depart + dist(leg.start, waypoint) / speed
    new_arrive = t_wp + dist(waypoint, leg.end) / speed
    delta = new_arrive - leg.arrive

    shifted = _shift_from(path, leg.arrive, delta)
    legs = list(shifted.legs)
    legs[leg_idx : leg_idx + 1] = [
        Leg(leg.start, waypoint, leg.depart, t_wp),
        Leg(waypoint, leg.end, t_wp, new_arrive),
    ]
    return replace(shifted, legs=tuple(legs))


def _lower_priority(event: CollisionEvent, priorities: PriorityAssignment) -> int:
    """Position (0 or 1) in event.drones of the drone to repair."""
    a, b = event.drones
    return 0 if priorities.priority[a] < priorities.priority[b] else 1


def _wait_leg_for_occupier(path: TimedPath, cell: int, at_time: float) -> int | None:
    """Leg whose arrival begins the hover at `cell` covering `at_time`."""
    for h in path.hovers:
        if h.cell == cell and h.start <= at_time <= h.end:
            for i, leg in enumerate(path.legs):
                if math.isclose(leg.arrive, h.start, abs_tol=1e-9):
                    return i
    return None


def _repair_with_wait(
    by_id: dict[int, TimedPath],
    event: CollisionEvent,
    low_pos: int,
    params: FieldParams,
    env: env_mod.GridEnvironment,
    granularity: float,
) -> TimedPath:
    """Delay the lower-priority drone by the minimal granular wait clearing the predicate."""
    low_id = event.drones[low_pos]
    other_id = event.drones[1 - low_pos]
    horizon = max(p.end_time() for p in by_id.values()) + 1.0
    steps = int(math.ceil(horizon / granularity)) + 1

    if event.kind == KIND_CROSS:
        low_leg_idx = event.leg_index[low_pos]
        other_leg_idx = event.leg_index[1 - low_pos]

        def apply(w: float) -> TimedPath:
            return _insert_wait(by_id[low_id], low_leg_idx, w, env)

        def cleared(candidate: TimedPath) -> bool:
            la = candidate.legs[low_leg_idx]
            lb = by_id[other_id].legs[other_leg_idx]
            return (
                _leg_pair_event(low_id, other_id, low_leg_idx, other_leg_idx, la, lb, params.d_min)
                is None
            )

    elif low_pos == 0:  # destination occupied, arriving drone yields
        leg_idx = event.leg_index[0]
        cell = _arrival_cells(by_id[low_id])[leg_idx]
        occ = _occupancies(by_id[other_id])

        def apply(w: float) -> TimedPath:
            return _insert_wait(by_id[low_id], leg_idx, w, env)

        def cleared(candidate: TimedPath) -> bool:
            t_arr = candidate.legs[leg_idx].arrive
            return not any(c == cell and s <= t_arr <= e for c, s, e in occ)

    else:  # destination occupied, hovering drone yields: delay its whole stay there
        arr_leg_idx = event.leg_index[0]
        cell = _arrival_cells(by_id[other_id])[arr_leg_idx]
        t_arr = by_id[other_id].legs[arr_leg_idx].arrive
        wait_leg = _wait_leg_for_occupier(by_id[low_id], cell, event.time)

        def apply(w: float) -> TimedPath:
            if wait_leg is None:
                return _shift_from(by_id[low_id], 0.0, w)
            return _insert_wait(by_id[low_id], wait_leg, w, env)

        def cleared(candidate: TimedPath) -> bool:
            return not any(c == cell and s <= t_arr <= e for c, s, e in _occupancies(candidate))

    for k in range(1, steps + 1):
        candidate = apply(k * granularity)
        if cleared(candidate):
            return candidate
    raise UnresolvedScheduleError([event])


def schedule_ca(
    paths: list[TimedPath],
    priorities: PriorityAssignment,
    params: FieldParams,
    env: env_mod.GridEnvironment,
    max_iterations: int = REPAIR_CAP,
    granularity: float = WAIT_GRANULARITY,
) -> list[TimedPath]:
    """Repair planned paths until collision-free: waits for cross/destination
    conflicts, a perpendicular detour for head-on conflicts, always on the
    lower-priority drone. Raises UnresolvedScheduleError at the iteration cap."""
    order = [p.drone_id for p in paths]
    by_id = {p.drone_id: p for p in paths}

    for _ in range(max_iterations):
        events = detect_collisions([by_id[d] for d in order], params)
        if not events:
            return [by_id[d] for d in order]
        ev = events[0]
        low_pos = _lower_priority(ev, priorities)
        low_id = ev.drones[low_pos]

        if ev.kind == KIND_PARALLEL:
            by_id[low_id] = _detour(by_id[low_id], ev.leg_index[low_pos], 2.0 * params.d_min, env)
        else:
            by_id[low_id] = _repair_with_wait(by_id, ev, low_pos, params, env, granularity)

    residual = detect_collisions([by_id[d] for d in order], params)
    if residual:
        raise UnresolvedScheduleError(residual)
    return [by_id[d] for d in order]


def write_events_csv(events: list[CollisionEvent], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["time", "kind", "drone_a", "drone_b", "x", "y"])
        for e in events:
            writer.writerow(
                [repr(e.time), e.kind, e.drones[0], e.drones[1], repr(e.location[0]), repr(e.location[1])]
            )
