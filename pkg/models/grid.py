from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Literal, NamedTuple, Tuple

import numpy as np
from pydantic import BaseModel, Field

Cell = Tuple[int, int]


class Connectivity(str, Enum):
    FOUR = "four"
    EIGHT = "eight"


class HeuristicKind(str, Enum):
    MANHATTAN = "manhattan"
    EUCLIDEAN = "euclidean"


class MapHeader(BaseModel):
    """First line of a `.map` file."""

    schema_version: Literal[1] = 1
    resolution: float = Field(gt=0)
    origin: Tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True, eq=False)
class GridMap:
    """Occupancy grid indexed [y, x]; cell (x, y) is centred at origin + (x, y) * resolution."""

    occupancy: np.ndarray
    resolution: float = 1.0
    origin: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        occupancy = np.array(self.occupancy, dtype=bool)
        if occupancy.ndim != 2 or occupancy.shape[0] < 1 or occupancy.shape[1] < 1:
            raise ValueError("occupancy must be a non-empty 2D grid")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        occupancy.setflags(write=False)
        object.__setattr__(self, "occupancy", occupancy)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def empty(cls, width: int, height: int, resolution: float = 1.0) -> "GridMap":
        return cls(np.zeros((height, width), dtype=bool), resolution)

    def with_obstacles(self, cells: Iterable[Cell]) -> "GridMap":
        occupancy = self.occupancy.copy()
        for x, y in cells:
            occupancy[y, x] = True
        return GridMap(occupancy, self.resolution, self.origin)

    @property
    def width(self) -> int:
        return self.occupancy.shape[1]

    @property
    def height(self) -> int:
        return self.occupancy.shape[0]

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and not self.occupancy[cell[1], cell[0]]

    def index(self, cell: Cell) -> int:
        """Row-major cell index."""
        return cell[1] * self.width + cell[0]

    def cell_center(self, cell: Cell) -> Tuple[float, float]:
        return (
            self.origin[0] + cell[0] * self.resolution,
            self.origin[1] + cell[1] * self.resolution,
        )

    def world_to_cell(self, x: float, y: float) -> Cell:
        return (
            int(round((x - self.origin[0]) / self.resolution)),
            int(round((y - self.origin[1]) / self.resolution)),
        )


@dataclass(frozen=True)
class PlanResult:
    path: Tuple[Cell, ...]
    cost: float
    nodes_expanded: int
    found: bool
    expanded: Tuple[Cell, ...] = field(default=(), compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "cost": self.cost if self.found else None,
            "nodes_expanded": self.nodes_expanded,
            "path_cells": len(self.path),
        }


class Waypoint(NamedTuple):
    t: float
    x: float
    y: float
    heading: float


@dataclass(frozen=True)
class TimedPath:
    waypoints: Tuple[Waypoint, ...]

    def __post_init__(self):
        waypoints = tuple(Waypoint(*w) for w in self.waypoints)
        if not waypoints:
            raise ValueError("a timed path needs at least one waypoint")
        if any(b.t <= a.t for a, b in zip(waypoints, waypoints[1:])):
            raise ValueError("waypoint timestamps must be strictly increasing")
        object.__setattr__(self, "waypoints", waypoints)

    @property
    def t_end(self) -> float:
        return self.waypoints[-1].t

    @property
    def duration(self) -> float:
        return self.waypoints[-1].t - self.waypoints[0].t

    @property
    def goal(self) -> Waypoint:
        return self.waypoints[-1]

    def length(self) -> float:
        return float(
            sum(np.hypot(b.x - a.x, b.y - a.y) for a, b in zip(self.waypoints, self.waypoints[1:]))
        )

    def rows(self) -> List[Waypoint]:
        return list(self.waypoints)
