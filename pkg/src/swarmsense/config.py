"""Scenario configuration: one JSON document drives the whole pipeline.

Relative file paths inside a config resolve against the config file's own
directory, so bundled configs can reference bundled data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import env as env_mod
from .energy import DroneSpec
from .errors import ConfigError
from .pfield import FieldParams
from .sim import DEFAULT_DT, DEFAULT_RISK_RADIUS, DEFAULT_TIME_CAP, METHODS

SCHEMA_VERSION = 1


@dataclass
class ScenarioConfig:
    rows: int = 2
    cols: int = 3
    cell_width: float = 0.55
    cell_height: float = 0.47
    altitude: float = 0.50
    margin: float = env_mod.DEFAULT_MARGIN
    n_drones: int = 4
    spec: DroneSpec = field(default_factory=DroneSpec)
    methods: tuple[str, ...] = METHODS
    seeds: tuple[int, ...] = (0,)
    # plan generation
    plans_per_agent: int = 16
    t_min: float = 10.0
    t_max: float = 60.0
    l_max: int | None = None
    # collective selection
    iterations: int = 40
    tree_seed: int | None = None
    # field / simulation
    d_min: float = 0.25
    delta: float = 2.5
    arrival_eps: float = 0.02
    include_walls: bool = False
    track_current_direction: bool = False
    dt: float = DEFAULT_DT
    risk_radius: float = DEFAULT_RISK_RADIUS
    risk_include_walls: bool = False
    time_cap: float = DEFAULT_TIME_CAP
    # requirement source: exactly one of these
    trajectories_csv: str | None = None
    requirement_csv: str | None = None
    requirement_values: list[float] | None = None
    window: tuple[float, float] = (0.0, 60.0)
    base_dir: Path = field(default_factory=Path)

    def field_params(self) -> FieldParams:
        return FieldParams(
            d_min=self.d_min,
            delta=self.delta,
            arrival_eps=self.arrival_eps,
            include_walls=self.include_walls,
            track_current_direction=self.track_current_direction,
        )

    def build_env(self) -> env_mod.GridEnvironment:
        return env_mod.build_grid(
            self.rows, self.cols, self.cell_width, self.cell_height,
            self.altitude, self.n_drones, self.margin,
        )

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    def load_requirement(self, environment: env_mod.GridEnvironment) -> env_mod.SensingRequirement:
        sources = [
            self.trajectories_csv is not None,
            self.requirement_csv is not None,
            self.requirement_values is not None,
        ]
        if sum(sources) != 1:
            raise ConfigError(
                "config must set exactly one of trajectories_csv, requirement_csv, requirement_values"
            )
        if self.requirement_values is not None:
            values = np.asarray(self.requirement_values, dtype=float)
            if len(values) != environment.n_cells:
                raise ConfigError(
                    f"requirement_values has {len(values)} entries, grid has {environment.n_cells}"
                )
            return env_mod.SensingRequirement(values)
        if self.requirement_csv is not None:
            return env_mod.read_requirement_csv(self.resolve(self.requirement_csv), environment.n_cells)
        records = env_mod.read_trajectories_csv(self.resolve(self.trajectories_csv))
        return env_mod.ingest_trajectories(records, environment, self.window).requirement


_SPEC_KEYS = {
    "mass",
    "propeller_length",
    "battery_capacity_mah",
    "battery_voltage",
    "cruise_speed",
    "expected_flight_time",
    "travel_power_factor",
}


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        with open(path) as f:
            raw = json.load(f)
    except FileNotFoundError as exc:
        raise ConfigError(f"config not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc

    version = raw.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{path}: schema_version must be {SCHEMA_VERSION}, got {version}")

    spec_raw = raw.pop("drone_spec", {})
    unknown = set(spec_raw) - _SPEC_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown drone_spec keys {sorted(unknown)}")
    spec = DroneSpec(**spec_raw)

    cfg = ScenarioConfig(spec=spec, base_dir=path.parent)
    for key, value in raw.items():
        if not hasattr(cfg, key) or key in ("spec", "base_dir"):
            raise ConfigError(f"{path}: unknown config key {key!r}")
        if key in ("methods", "seeds", "window"):
            value = tuple(value)
        setattr(cfg, key, value)

    for m in cfg.methods:
        if m not in METHODS:
            raise ConfigError(f"{path}: unknown method {m!r}; expected subset of {METHODS}")
    if not cfg.seeds:
        raise ConfigError(f"{path}: seeds must be non-empty")
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "rows": cfg.rows,
        "cols": cfg.cols,
        "cell_width": cfg.cell_width,
        "cell_height": cfg.cell_height,
        "altitude": cfg.altitude,
        "margin": cfg.margin,
        "n_drones": cfg.n_drones,
        "drone_spec": {
            "mass": cfg.spec.mass,
            "propeller_length": cfg.spec.propeller_length,
            "battery_capacity_mah": cfg.spec.battery_capacity_mah,
            "battery_voltage": cfg.spec.battery_voltage,
            "cruise_speed": cfg.spec.cruise_speed,
            "expected_flight_time": cfg.spec.expected_flight_time,
            "travel_power_factor": cfg.spec.travel_power_factor,
        },
        "methods": list(cfg.methods),
        "seeds": list(cfg.seeds),
        "plans_per_agent": cfg.plans_per_agent,
        "t_min": cfg.t_min,
        "t_max": cfg.t_max,
        "l_max": cfg.l_max,
        "iterations": cfg.iterations,
        "tree_seed": cfg.tree_seed,
        "d_min": cfg.d_min,
        "delta": cfg.delta,
        "arrival_eps": cfg.arrival_eps,
        "include_walls": cfg.include_walls,
        "track_current_direction": cfg.track_current_direction,
        "dt": cfg.dt,
        "risk_radius": cfg.risk_radius,
        "risk_include_walls": cfg.risk_include_walls,
        "time_cap": cfg.time_cap,
        "trajectories_csv": cfg.trajectories_csv,
        "requirement_csv": cfg.requirement_csv,
        "requirement_values": cfg.requirement_values,
        "window": list(cfg.window),
    }
