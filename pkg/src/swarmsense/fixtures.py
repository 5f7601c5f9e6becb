"""Bundled example data: a 2x3 indoor arena config and a synthetic congested
corridor traffic trace (heavy vehicle counts in two of the six cells)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def _data_path(name: str) -> Path:
    with resources.as_file(resources.files("swarmsense.data").joinpath(name)) as p:
        return Path(p)


def paper_grid_config_path() -> Path:
    return _data_path("paper_grid.json")


def corridor_trajectories_path() -> Path:
    return _data_path("corridor_trajectories.csv")
