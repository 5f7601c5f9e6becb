"""Deterministic multi-drone sensing mission simulator.

Agents generate energy-costed sensing plans over a grid arena, coordinate plan
selection by collective learning over a balanced binary tree, and execute
missions under priority-weighted potential-field collision avoidance, with
scheduler and no-avoidance baselines and the three evaluation metrics (energy,
risk of collisions, sensing mismatch).
"""

__version__ = "0.1.0"

from .collective import Selection, brute_force, build_tree, greedy_select, optimize, rss, unit_scale
from .energy import DroneSpec, battery_energy, leg_time, nominal_power, plan_cost
from .env import (
    GridEnvironment,
    SensingRequirement,
    TrajectoryRecord,
    build_grid,
    cell_at,
    cell_center,
    ingest_trajectories,
)
from .metrics import Metrics, aggregate, compute_metrics
from .pfield import (
    FieldParams,
    PriorityAssignment,
    attractive,
    repulsion_radius,
    repulsive_step,
    scale_factor,
    total_vector,
)
from .plangen import AgentPlanSet, Plan, generate_plans
from .scheduling import (
    CollisionEvent,
    TimedPath,
    assign_priorities,
    build_timed_path,
    detect_collisions,
    schedule_ca,
)
from .sim import METHODS, MissionReport, Scenario, risk_distance, run

__all__ = [
    "__version__",
    "AgentPlanSet",
    "CollisionEvent",
    "DroneSpec",
    "FieldParams",
    "GridEnvironment",
    "METHODS",
    "Metrics",
    "MissionReport",
    "Plan",
    "PriorityAssignment",
    "Scenario",
    "Selection",
    "SensingRequirement",
    "TimedPath",
    "TrajectoryRecord",
    "aggregate",
    "assign_priorities",
    "attractive",
    "battery_energy",
    "brute_force",
    "build_grid",
    "build_timed_path",
    "build_tree",
    "cell_at",
    "cell_center",
    "compute_metrics",
    "detect_collisions",
    "generate_plans",
    "greedy_select",
    "ingest_trajectories",
    "leg_time",
    "nominal_power",
    "optimize",
    "plan_cost",
    "repulsion_radius",
    "repulsive_step",
    "risk_distance",
    "rss",
    "run",
    "scale_factor",
    "schedule_ca",
    "total_vector",
    "unit_scale",
]
