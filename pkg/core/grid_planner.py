"""A* on an occupancy grid, a Dijkstra oracle and constant-speed time parameterization."""

import heapq
import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from core.errors import ConfigError, InvalidArgumentError
from core.utils import format_validation_error
from models.grid import Cell, Connectivity, GridMap, HeuristicKind, MapHeader, PlanResult, TimedPath, Waypoint

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
AXIS_MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1))
DIAGONAL_MOVES = ((1, 1), (1, -1), (-1, 1), (-1, -1))
FREE, OCCUPIED = ".", "#"


def load_map(path) -> GridMap:
    """Parse a `.map` file: JSON header line, then one `#`/`.` row per line (line i is y = i)."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(str(exc.strerror or exc), str(path)) from exc
    if not lines:
        raise ConfigError("empty map file", str(path))
    try:
        header = MapHeader.model_validate_json(lines[0])
    except ValidationError as exc:
        raise ConfigError(format_validation_error(exc), f"{path}:1") from exc

    rows = []
    for number, line in enumerate(lines[1:], start=2):
        line = line.rstrip()
        if not line:
            continue
        bad = set(line) - {FREE, OCCUPIED}
        if bad:
            raise ConfigError(f"unexpected map characters {sorted(bad)}", f"{path}:{number}")
        if rows and len(line) != len(rows[0]):
            raise ConfigError(f"row has {len(line)} cells, expected {len(rows[0])}", f"{path}:{number}")
        rows.append([c == OCCUPIED for c in line])
    if not rows:
        raise ConfigError("map has no rows", str(path))
    return GridMap(np.array(rows, dtype=bool), header.resolution, header.origin)


def dump_map(grid: GridMap) -> str:
    header = {"schema_version": 1, "resolution": grid.resolution, "origin": list(grid.origin)}
    lines = [json.dumps(header, sort_keys=True)]
    for row in grid.occupancy:
        lines.append("".join(OCCUPIED if cell else FREE for cell in row))
    return "\n".join(lines) + "\n"


def heuristic_value(kind: HeuristicKind, cell: Cell, goal: Cell) -> float:
    dx = abs(cell[0] - goal[0])
    dy = abs(cell[1] - goal[1])
    if kind == HeuristicKind.MANHATTAN:
        return float(dx + dy)
    return math.sqrt(dx * dx + dy * dy)


def neighbors(grid: GridMap, cell: Cell, connectivity: Connectivity) -> List[Tuple[Cell, float]]:
    """Free neighbours with edge costs; diagonals may not cut an occupied corner."""
    x, y = cell
    out = []
    for dx, dy in AXIS_MOVES:
        nxt = (x + dx, y + dy)
        if grid.is_free(nxt):
            out.append((nxt, 1.0))
    if connectivity == Connectivity.EIGHT:
        for dx, dy in DIAGONAL_MOVES:
            nxt = (x + dx, y + dy)
            if grid.is_free(nxt) and grid.is_free((x + dx, y)) and grid.is_free((x, y + dy)):
                out.append((nxt, SQRT2))
    return out


def path_cost(path) -> float:
    """Cost as (axis moves) + (diagonal moves) * sqrt(2), independent of move order."""
    axis = diagonal = 0
    for a, b in zip(path, path[1:]):
        if a[0] != b[0] and a[1] != b[1]:
            diagonal += 1
        else:
            axis += 1
    return axis + diagonal * SQRT2


def _check_endpoint(grid: GridMap, cell: Cell, name: str) -> Cell:
    cell = (int(cell[0]), int(cell[1]))
    if not grid.in_bounds(cell):
        raise InvalidArgumentError(f"{name} cell {cell} is outside the {grid.width}x{grid.height} map")
    if not grid.is_free(cell):
        raise InvalidArgumentError(f"{name} cell {cell} is occupied")
    return cell


def _reconstruct(parents: Dict[Cell, Optional[Cell]], goal: Cell) -> Tuple[Cell, ...]:
    path = [goal]
    while parents[path[-1]] is not None:
        path.append(parents[path[-1]])
    return tuple(reversed(path))


def _best_first(grid, start, goal, connectivity, estimate) -> PlanResult:
    start = _check_endpoint(grid, start, "start")
    goal = _check_endpoint(grid, goal, "goal")

    g_cost: Dict[Cell, float] = {start: 0.0}
    parents: Dict[Cell, Optional[Cell]] = {start: None}
    closed = set()
    expanded: List[Cell] = []
    # (f, -g, row-major index): equal f prefers deeper nodes, then lower index
    frontier = [(estimate(start), -0.0, grid.index(start), start)]

    while frontier:
        _, neg_g, _, cell = heapq.heappop(frontier)
        if cell in closed:
            continue
        closed.add(cell)
        expanded.append(cell)
        if cell == goal:
            path = _reconstruct(parents, goal)
            return PlanResult(path, path_cost(path), len(closed), True, tuple(expanded))
        for nxt, step in neighbors(grid, cell, connectivity):
            if nxt in closed:
                continue
            tentative = -neg_g + step
            if tentative < g_cost.get(nxt, math.inf):
                g_cost[nxt] = tentative
                parents[nxt] = cell
                heapq.heappush(frontier, (tentative + estimate(nxt), -tentative, grid.index(nxt), nxt))

    logger.info("no path from %s to %s after %d expansions", start, goal, len(closed))
    return PlanResult((), math.inf, len(closed), False, tuple(expanded))


def astar(
    grid: GridMap,
    start: Cell,
    goal: Cell,
    connectivity: Connectivity = Connectivity.EIGHT,
    heuristic: HeuristicKind = HeuristicKind.EUCLIDEAN,
) -> PlanResult:
    goal_cell = (int(goal[0]), int(goal[1]))
    result = _best_first(grid, start, goal, connectivity, lambda c: heuristic_value(heuristic, c, goal_cell))
    logger.debug(
        "astar %s/%s: found=%s cost=%.4f expanded=%d",
        connectivity.value,
        heuristic.value,
        result.found,
        result.cost,
        result.nodes_expanded,
    )
    return result


def dijkstra(grid: GridMap, start: Cell, goal: Cell, connectivity: Connectivity = Connectivity.EIGHT) -> PlanResult:
    """Uninformed search; the optimal-cost oracle for `astar`."""
    return _best_first(grid, start, goal, connectivity, lambda c: 0.0)


def cost_to_go(grid: GridMap, goal: Cell, connectivity: Connectivity) -> Dict[Cell, float]:
    """Exact remaining cost from every reachable cell to `goal`."""
    goal = _check_endpoint(grid, goal, "goal")
    best: Dict[Cell, float] = {goal: 0.0}
    frontier = [(0.0, goal)]
    done = set()
    while frontier:
        cost, cell = heapq.heappop(frontier)
        if cell in done:
            continue
        done.add(cell)
        for nxt, step in neighbors(grid, cell, connectivity):
            if cost + step < best.get(nxt, math.inf):
                best[nxt] = cost + step
                heapq.heappush(frontier, (cost + step, nxt))
    return best


def time_parameterize(result: PlanResult, grid: GridMap, speed: float) -> TimedPath:
    """Constant-speed timing of the cell polyline in world coordinates."""
    if not result.path:
        raise InvalidArgumentError("cannot time-parameterize an empty path")
    if not speed > 0:
        raise InvalidArgumentError("speed must be positive")
    points = [grid.cell_center(cell) for cell in result.path]
    if len(points) == 1:
        x, y = points[0]
        return TimedPath((Waypoint(0.0, x, y, 0.0),))

    waypoints = []
    t = 0.0
    heading = 0.0
    for i, (x, y) in enumerate(points):
        if i + 1 < len(points):
            nx, ny = points[i + 1]
            heading = math.atan2(ny - y, nx - x)
        waypoints.append(Waypoint(t, x, y, heading))
        if i + 1 < len(points):
            t += math.hypot(nx - x, ny - y) / speed
    return TimedPath(tuple(waypoints))


def plan_path(
    grid: GridMap,
    start_xy: Tuple[float, float],
    goal_xy: Tuple[float, float],
    speed: float,
    connectivity: Connectivity = Connectivity.EIGHT,
    heuristic: HeuristicKind = HeuristicKind.EUCLIDEAN,
) -> Tuple[PlanResult, Optional[TimedPath]]:
    """World-coordinate front end: snap to cells, search, time the result."""
    result = astar(grid, grid.world_to_cell(*start_xy), grid.world_to_cell(*goal_xy), connectivity, heuristic)
    if not result.found:
        return result, None
    return result, time_parameterize(result, grid, speed)


def compare_heuristics(grid: GridMap, start: Cell, goal: Cell) -> List[dict]:
    """Every connectivity/heuristic pairing next to the Dijkstra optimum."""
    rows = []
    for connectivity in Connectivity:
        optimum = dijkstra(grid, start, goal, connectivity)
        for heuristic in HeuristicKind:
            result = astar(grid, start, goal, connectivity, heuristic)
            row = {"connectivity": connectivity.value, "heuristic": heuristic.value}
            row.update(result.to_dict())
            row["optimal_cost"] = optimum.cost if optimum.found else None
            row["dijkstra_nodes"] = optimum.nodes_expanded
            rows.append(row)
    return rows


def path_header() -> List[str]:
    return ["t", "x", "y", "heading"]
