"""Exception types shared across the package.

DataError subclasses signal bad inputs (CLI exit code 2); RuntimeFailure
subclasses signal failures of an otherwise valid run (CLI exit code 3).
"""


class SwarmSenseError(Exception):
    pass


class DataError(SwarmSenseError):
    pass


class RuntimeFailure(SwarmSenseError):
    pass


class InvalidGeometryError(DataError):
    """Non-positive grid dimensions or malformed arena geometry."""


class InvalidSpecError(DataError):
    """Drone spec with a non-positive physical parameter."""


class DimensionMismatchError(DataError):
    """Vectors of unequal length where equal length is required."""


class InvalidPriorityError(DataError):
    """Priority below 1 (would shrink the repulsion radius below d_min)."""


class EmptyPopulationError(DataError):
    """Zero agents where at least one is required."""


class BatteryInfeasibleError(RuntimeFailure):
    """No battery-feasible plan exists for an agent."""

    def __init__(self, agent_id: int, message: str = ""):
        self.agent_id = agent_id
        super().__init__(message or f"agent {agent_id}: no battery-feasible plan")


class CombinationBoundExceeded(RuntimeFailure):
    """Exhaustive search refused: too many plan combinations."""


class CoincidentPositionsError(RuntimeFailure):
    """Two positions coincide; repulsion direction is undefined."""


class UnresolvedScheduleError(RuntimeFailure):
    """Collision repair hit its iteration cap with events remaining."""

    def __init__(self, residual_events, message: str = ""):
        self.residual_events = list(residual_events)
        super().__init__(
            message
            or f"schedule repair cap hit with {len(self.residual_events)} residual events"
        )


class ConfigError(DataError):
    """Malformed or inconsistent scenario configuration."""
