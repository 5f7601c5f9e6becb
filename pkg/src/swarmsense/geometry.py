"""Small 2D vector helpers on plain float tuples.

The simulator's inner loop calls these thousands of times per tick, so they
stay allocation-light (tuples, math module) instead of numpy.
"""

from __future__ import annotations

import math

Point = tuple[float, float]
Segment = tuple[Point, Point]


def dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def norm(v: Point) -> float:
    return math.hypot(v[0], v[1])


def sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def add(a: Point, b: Point) -> Point:
    return (a[0] + b[0], a[1] + b[1])


def scale(v: Point, s: float) -> Point:
    return (v[0] * s, v[1] * s)


def unit(v: Point) -> Point:
    n = norm(v)
    if n == 0.0:
        return (0.0, 0.0)
    return (v[0] / n, v[1] / n)


def dot(a: Point, b: Point) -> float:
    return a[0] * b[0] + a[1] * b[1]


def cross(a: Point, b: Point) -> float:
    return a[0] * b[1] - a[1] * b[0]


def rotate(v: Point, angle: float) -> Point:
    c, s = math.cos(angle), math.sin(angle)
    return (c * v[0] - s * v[1], s * v[0] + c * v[1])


def lerp(a: Point, b: Point, t: float) -> Point:
    return (a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t)


def nearest_point_on_segment(p: Point, seg: Segment) -> Point:
    """Closest point to p on the closed segment seg."""
    (ax, ay), (bx, by) = seg
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom == 0.0:
        return (ax, ay)
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / denom
    t = min(1.0, max(0.0, t))
    return (ax + t * dx, ay + t * dy)


def dist_to_segment(p: Point, seg: Segment) -> float:
    return dist(p, nearest_point_on_segment(p, seg))
