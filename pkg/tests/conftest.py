import numpy as np
import pytest

from swarmsense import DroneSpec, SensingRequirement, build_grid


@pytest.fixture
def paper_env():
    """2x3 grid of 55x47 cm cells at 50 cm altitude, four drones."""
    return build_grid(2, 3, 0.55, 0.47, 0.50, 4)


@pytest.fixture
def paper_spec():
    return DroneSpec()


@pytest.fixture
def skewed_requirement():
    """Congested-corridor shape: heavy counts in cells 1 and 4."""
    return SensingRequirement(np.array([1.0, 40.0, 7.0, 9.0, 41.0, 5.0]))
