"""Priority-weighted artificial potential field steering.

Per drone and tick, the steering vector is the unit attractive pull toward the
current destination plus one repulsive term per in-range obstacle. An obstacle
with priority P repels within radius d_min*(1 + ln P) at magnitude s^2/D with
s = delta*|attractive| + ln P, so inside the radius repulsion always dominates
attraction and higher-priority drones carve wider, stronger bubbles.

Repulsive terms keep the direction they had on radius entry and only rescale
their magnitude each tick (the prev-vector memory); leaving the radius zeroes
the term so re-entry re-initializes the direction from the geometry. A
deterministic 1e-3 rad lateral tilt on entry breaks exactly collinear head-on
standoffs that priority alone cannot resolve in finite precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import CoincidentPositionsError, DataError, InvalidPriorityError
from .geometry import (
    Point,
    Segment,
    add,
    dist,
    nearest_point_on_segment,
    norm,
    rotate,
    scale,
    sub,
    unit,
)
from .seeding import sign_for

DEFAULT_D_MIN = 0.25  # m, minimum safe separation
DEFAULT_DELTA = 2.5  # repulsion strength scaling
DEFAULT_ARRIVAL_EPS = 0.02  # m, destination reached
ANTIPARALLEL_TOL = 1e-6  # rad, exact head-on detection
ENTRY_TILT = 1e-3  # rad, symmetry-breaking lateral perturbation

ObstacleKey = int | tuple[str, int]


@dataclass(frozen=True)
class FieldParams:
    d_min: float = DEFAULT_D_MIN
    delta: float = DEFAULT_DELTA
    arrival_eps: float = DEFAULT_ARRIVAL_EPS
    # Eq.-literal persisted repulsion direction; True re-derives the direction
    # from the current obstacle->drone geometry every tick instead.
    track_current_direction: bool = False
    # Wall repulsion per the same kernel. Off by default: with wall priority
    # above all drones the wall radius covers a small arena entirely and no
    # destination is reachable. Walls stay physical via position clamping.
    include_walls: bool = False

    def __post_init__(self):
        if self.d_min <= 0 or self.delta <= 0:
            raise DataError("d_min and delta must be positive")


@dataclass(frozen=True)
class PriorityAssignment:
    """Distinct P >= 1 per drone (the minimum is exactly 1) plus a wall constant."""

    priority: dict[int, float]
    wall_priority: float

    def __post_init__(self):
        values = sorted(self.priority.values())
        if values and not math.isclose(values[0], 1.0):
            raise InvalidPriorityError(f"minimum drone priority must be 1, got {values[0]}")
        if any(p < 1.0 for p in values) or self.wall_priority < 1.0:
            raise InvalidPriorityError("priorities must be >= 1")
        if len(set(values)) != len(values):
            raise InvalidPriorityError("drone priorities must be distinct")


def repulsion_radius(p: float, d_min: float = DEFAULT_D_MIN) -> float:
    """Maximum obstacle repulsion radius: d_min * (1 + ln p)."""
    if p < 1.0:
        raise InvalidPriorityError(f"priority {p} < 1 would shrink the radius below d_min")
    return d_min * (1.0 + math.log(p))


def scale_factor(delta: float, attr_mag: float, p: float) -> float:
    """Repulsion strength: delta * |attractive| + ln p."""
    if p < 1.0:
        raise InvalidPriorityError(f"priority {p} < 1")
    return delta * attr_mag + math.log(p)


def attractive(dest: Point, pos: Point, eps: float = DEFAULT_ARRIVAL_EPS) -> Point:
    """Unit vector from pos toward dest; zero once within the arrival tolerance."""
    d = sub(dest, pos)
    if norm(d) <= eps:
        return (0.0, 0.0)
    return unit(d)


def repulsive_step(
    prev: Point,
    obstacle_pos: Point,
    pos: Point,
    s: float,
    radius: float,
) -> Point:
    """One tick of a repulsive component.

    Zero outside the radius. Inside, magnitude is exactly s^2 / D along the
    persisted previous direction, or along the unit obstacle->pos direction on
    entry (prev = 0), realising the unit initial magnitude before scaling.
    """
    if s <= 0:
        raise DataError(f"scale factor must be positive, got {s}")
    d = dist(pos, obstacle_pos)
    if d > radius:
        return (0.0, 0.0)
    if d == 0.0:
        raise CoincidentPositionsError(f"obstacle and drone coincide at {pos}")
    direction = unit(prev) if norm(prev) > 0.0 else unit(sub(pos, obstacle_pos))
    return scale(direction, s * s / d)


def _entry_direction(
    obstacle_pos: Point,
    pos: Point,
    attr: Point,
    seed: int,
    drone_id: int,
    obstacle_key: ObstacleKey,
) -> Point:
    """Initial repulsion direction, tilted when exactly opposed to the attraction."""
    direction = unit(sub(pos, obstacle_pos))
    if norm(attr) > 0.0:
        # angle to the anti-parallel configuration: direction == -attr
        cosang = max(-1.0, min(1.0, direction[0] * -attr[0] + direction[1] * -attr[1]))
        if math.acos(cosang) <= ANTIPARALLEL_TOL:
            direction = rotate(direction, ENTRY_TILT * sign_for(seed, drone_id, obstacle_key))
    return direction


def total_vector(
    pos: Point,
    dest: Point | None,
    drone_id: int,
    neighbors: list[tuple[int, Point]],
    walls: tuple[Segment, ...],
    params: FieldParams,
    priorities: PriorityAssignment,
    prev: dict[ObstacleKey, Point],
    seed: int = 0,
) -> tuple[Point, dict[ObstacleKey, Point]]:
    """Combined steering vector at the drone's position plus per-obstacle components.

    neighbors: (drone_id, position) of every airborne other drone. The returned
    components dict holds only in-radius repulsive terms and is the `prev`
    argument for the next tick (absent key = memory reset, per the cutoff).
    """
    attr = attractive(dest, pos, params.arrival_eps) if dest is not None else (0.0, 0.0)
    attr_mag = norm(attr)

    obstacles: list[tuple[ObstacleKey, Point, float]] = [
        (oid, opos, priorities.priority[oid]) for oid, opos in neighbors
    ]
    if params.include_walls:
        for w_idx, seg in enumerate(walls):
            obstacles.append(
                (("wall", w_idx), nearest_point_on_segment(pos, seg), priorities.wall_priority)
            )

    total = attr
    components: dict[ObstacleKey, Point] = {}
    for key, opos, p in obstacles:
        radius = repulsion_radius(p, params.d_min)
        d = dist(pos, opos)
        if d > radius:
            continue
        if d == 0.0:
            raise CoincidentPositionsError(f"drone {drone_id} coincides with obstacle {key}")
        s = scale_factor(params.delta, attr_mag, p)
        prev_vec = prev.get(key, (0.0, 0.0))
        if params.track_current_direction or norm(prev_vec) == 0.0:
            direction = _entry_direction(opos, pos, attr, seed, drone_id, key)
        else:
            direction = unit(prev_vec)
        component = scale(direction, s * s / d)
        components[key] = component
        total = add(total, component)
    return total, components


def field_lattice(
    bounds: tuple[float, float, float, float],
    spacing: float,
    evaluate,
) -> list[tuple[Point, Point]]:
    """Evaluate a field function over a lattice (for quiver visualisation only)."""
    xmin, ymin, xmax, ymax = bounds
    out = []
    y = ymin
    while y <= ymax + 1e-9:
        x = xmin
        while x <= xmax + 1e-9:
            out.append(((x, y), evaluate((x, y))))
            x += spacing
        y += spacing
    return out
