"""Sensing arena: grid geometry, home pads, and per-cell sensing requirements.

Cell indexing is row-major (cell = row * cols + col) and this order is binding
for every vector of length M in the package: requirements, plan hover vectors,
sensed totals, and logs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, InvalidGeometryError
from .geometry import Point, Segment

DEFAULT_MARGIN = 0.30  # m of free strip between the cell lattice and the walls
PAD_INSET = 0.02  # m between the outermost home pads and the side walls


@dataclass(frozen=True)
class GridEnvironment:
    """Immutable arena: rows x cols lattice of rectangular cells plus a walled margin."""

    rows: int
    cols: int
    cell_width: float
    cell_height: float
    altitude: float
    walls: tuple[Segment, ...]
    home_pads: tuple[Point, ...]
    margin: float = DEFAULT_MARGIN

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    @property
    def width(self) -> float:
        """Lattice extent along x (m)."""
        return self.cols * self.cell_width

    @property
    def height(self) -> float:
        """Lattice extent along y (m)."""
        return self.rows * self.cell_height

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """Walled rectangle (xmin, ymin, xmax, ymax) including the margin."""
        return (-self.margin, -self.margin, self.width + self.margin, self.height + self.margin)


@dataclass(frozen=True)
class SensingRequirement:
    """Vehicles observed per cell over the mission window (length M, row-major)."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1:
            raise DataError("requirement must be a flat vector")
        if np.any(self.values < 0):
            raise DataError("requirement values must be non-negative")


@dataclass(frozen=True)
class TrajectoryRecord:
    """One timestamped vehicle position, normalized to the unit square."""

    vehicle_id: str
    t: float
    x: float
    y: float


@dataclass
class IngestResult:
    requirement: SensingRequirement
    rejected_records: int = 0
    empty_warning: bool = False


def build_grid(
    rows: int,
    cols: int,
    cell_w: float,
    cell_h: float,
    altitude: float,
    n_drones: int,
    margin: float = DEFAULT_MARGIN,
) -> GridEnvironment:
    """Build the arena: M = rows*cols cells, four boundary walls, evenly spaced home pads.

    Home pads sit on the margin strip below the lattice (y = -margin/2), spread
    evenly across the full walled width (small inset from the side walls), one
    per drone. The wide spread keeps pads outside each other's repulsion radii
    so takeoffs and landings do not congest.
    """
    if rows < 1 or cols < 1:
        raise InvalidGeometryError(f"grid must be at least 1x1, got {rows}x{cols}")
    if cell_w <= 0 or cell_h <= 0 or altitude <= 0 or margin <= 0:
        raise InvalidGeometryError("cell dimensions, altitude and margin must be positive")
    if n_drones < 1:
        raise InvalidGeometryError("need at least one drone")

    w, h = cols * cell_w, rows * cell_h
    x0, y0, x1, y1 = -margin, -margin, w + margin, h + margin
    walls = (
        ((x0, y0), (x1, y0)),
        ((x1, y0), (x1, y1)),
        ((x1, y1), (x0, y1)),
        ((x0, y1), (x0, y0)),
    )
    pad_y = -margin / 2.0
    if n_drones == 1:
        pads = ((w / 2.0, pad_y),)
    else:
        lo, hi = x0 + PAD_INSET, x1 - PAD_INSET
        pads = tuple((lo + i * (hi - lo) / (n_drones - 1), pad_y) for i in range(n_drones))
    return GridEnvironment(rows, cols, cell_w, cell_h, altitude, walls, pads, margin)


def cell_center(env: GridEnvironment, cell: int) -> Point:
    """Geometric centre of a cell, row-major indexing."""
    if not 0 <= cell < env.n_cells:
        raise IndexError(f"cell {cell} out of range for {env.rows}x{env.cols} grid")
    row, col = divmod(cell, env.cols)
    return ((col + 0.5) * env.cell_width, (row + 0.5) * env.cell_height)


def cell_at(env: GridEnvironment, p: Point) -> int | None:
    """Index of the cell containing p, or None outside the lattice."""
    x, y = p
    if not (0.0 <= x <= env.width and 0.0 <= y <= env.height):
        return None
    col = min(int(x / env.cell_width), env.cols - 1)
    row = min(int(y / env.cell_height), env.rows - 1)
    return row * env.cols + col


def ingest_trajectories(
    records: list[TrajectoryRecord],
    env: GridEnvironment,
    window: tuple[float, float],
) -> IngestResult:
    """Bin vehicle tracks into per-cell distinct-vehicle counts.

    values[c] counts distinct vehicle ids observed inside cell c at any record
    time within [t0, t1]; a vehicle crossing several cells counts toward each.
    Records with coordinates outside [0, 1] are rejected and counted.
    """
    t0, t1 = window
    if not t0 < t1:
        raise DataError(f"window must satisfy t0 < t1, got {window}")

    seen: list[set[str]] = [set() for _ in range(env.n_cells)]
    rejected = 0
    for rec in records:
        if not (0.0 <= rec.x <= 1.0 and 0.0 <= rec.y <= 1.0):
            rejected += 1
            continue
        if not t0 <= rec.t <= t1:
            continue
        cell = cell_at(env, (rec.x * env.width, rec.y * env.height))
        if cell is not None:
            seen[cell].add(rec.vehicle_id)

    values = np.array([len(s) for s in seen], dtype=float)
    return IngestResult(
        requirement=SensingRequirement(values),
        rejected_records=rejected,
        empty_warning=len(records) == 0,
    )


def read_trajectories_csv(path: str | Path) -> list[TrajectoryRecord]:
    """Read `vehicle_id,t,x,y` rows; x,y normalized to [0,1]."""
    records = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        expected = {"vehicle_id", "t", "x", "y"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise DataError(f"{path}: expected header vehicle_id,t,x,y")
        for row in reader:
            records.append(
                TrajectoryRecord(row["vehicle_id"], float(row["t"]), float(row["x"]), float(row["y"]))
            )
    return records


def write_requirement_csv(req: SensingRequirement, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["cell", "value"])
        for c, v in enumerate(req.values):
            writer.writerow([c, repr(float(v))])


def read_requirement_csv(path: str | Path, expected_cells: int | None = None) -> SensingRequirement:
    values: dict[int, float] = {}
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or not {"cell", "value"}.issubset(reader.fieldnames):
            raise DataError(f"{path}: expected header cell,value")
        for row in reader:
            values[int(row["cell"])] = float(row["value"])
    n = max(values) + 1 if values else 0
    if expected_cells is not None and n != expected_cells:
        raise DataError(f"{path}: {n} cells, expected {expected_cells}")
    vec = np.zeros(n)
    for c, v in values.items():
        vec[c] = v
    return SensingRequirement(vec)
