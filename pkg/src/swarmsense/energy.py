"""Drone power model and plan energy costing.

A single nominal power level (battery energy / expected flight time) covers
hovering; traveling is charged at nominal power times a configurable factor
(default 1.0 — at 0.1 m/s the forward-flight increment of a 27 g quadrotor is
negligible). This is the one energy oracle shared by plan generation, greedy
selection, and the simulator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import env as env_mod
from .errors import InvalidSpecError
from .geometry import Point, dist

MAH_VOLT_TO_JOULES = 3.6  # 1 mAh * 1 V = 3.6 J


@dataclass(frozen=True)
class DroneSpec:
    mass: float = 0.027  # kg
    propeller_length: float = 0.047  # m
    battery_capacity_mah: float = 250.0
    battery_voltage: float = 3.7  # nominal 1S LiPo cell voltage
    cruise_speed: float = 0.1  # m/s average ground speed
    expected_flight_time: float = 420.0  # s on a full battery
    travel_power_factor: float = 1.0

    def __post_init__(self):
        for name in (
            "mass",
            "propeller_length",
            "battery_capacity_mah",
            "battery_voltage",
            "cruise_speed",
            "expected_flight_time",
            "travel_power_factor",
        ):
            if getattr(self, name) <= 0:
                raise InvalidSpecError(f"{name} must be positive, got {getattr(self, name)}")


def battery_energy(spec: DroneSpec) -> float:
    """Usable battery energy in joules."""
    return spec.battery_capacity_mah * spec.battery_voltage * MAH_VOLT_TO_JOULES


def nominal_power(spec: DroneSpec) -> float:
    """Hover power in watts: battery energy spread over the expected flight time."""
    return battery_energy(spec) / spec.expected_flight_time


def travel_power(spec: DroneSpec) -> float:
    return nominal_power(spec) * spec.travel_power_factor


def leg_time(a: Point, b: Point, spec: DroneSpec) -> float:
    """Straight-line travel time between two points at cruise speed."""
    return dist(a, b) / spec.cruise_speed


def travel_time(route: Sequence[int], env: env_mod.GridEnvironment, spec: DroneSpec, home: Point) -> float:
    """Time for home -> route cells in order -> home at cruise speed."""
    t = 0.0
    pos = home
    for cell in route:
        nxt = env_mod.cell_center(env, cell)
        t += leg_time(pos, nxt, spec)
        pos = nxt
    if route:
        t += leg_time(pos, home, spec)
    return t


def plan_cost(
    route: Sequence[int],
    hover: Sequence[float],
    env: env_mod.GridEnvironment,
    spec: DroneSpec,
    home: Point,
) -> float:
    """Energy in joules to fly home -> cells -> home and hover per the plan.

    cost = P * sum(hover) + P * travel_power_factor * travel_time.
    An empty route costs nothing.
    """
    p = nominal_power(spec)
    hover_total = float(sum(hover))
    return p * hover_total + p * spec.travel_power_factor * travel_time(route, env, spec, home)
