"""SVG figures. Output is byte-stable: fixed hash salt and no date metadata."""

from pathlib import Path
from typing import Dict, Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "mobimanip"

import numpy as np
from matplotlib.figure import Figure

from models.control import TrackingLog
from models.grid import GridMap, PlanResult, TimedPath


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def _draw_grid(ax, grid: GridMap) -> None:
    half = 0.5 * grid.resolution
    left, bottom = grid.origin[0] - half, grid.origin[1] - half
    extent = (left, left + grid.width * grid.resolution, bottom, bottom + grid.height * grid.resolution)
    ax.imshow(grid.occupancy, origin="lower", extent=extent, cmap="Greys", interpolation="nearest")
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")


def plot_plans(grid: GridMap, plans: Dict[str, PlanResult], path) -> Path:
    """Planned cell paths overlaid on the occupancy grid, one line per label."""
    fig = Figure(figsize=(8, 6))
    ax = fig.add_subplot()
    _draw_grid(ax, grid)
    for label, result in plans.items():
        if not result.found:
            continue
        points = np.array([grid.cell_center(cell) for cell in result.path])
        ax.plot(points[:, 0], points[:, 1], linewidth=1.5, label=f"{label} ({result.cost:.2f})")
    ax.legend(loc="upper right", fontsize="small")
    return _save(fig, path)


def plot_base_run(grid: GridMap, timed: TimedPath, rows: Sequence[Sequence[float]], path) -> Path:
    """Reference polyline and driven trajectory, plus the distance error over time."""
    fig = Figure(figsize=(10, 5))
    ax_map, ax_err = fig.subplots(1, 2)
    _draw_grid(ax_map, grid)
    ref = np.array([(w.x, w.y) for w in timed.waypoints])
    ax_map.plot(ref[:, 0], ref[:, 1], "--", label="reference")
    if rows:
        log = np.array(rows)
        ax_map.plot(log[:, 1], log[:, 2], label="base")
        ax_err.plot(log[:, 0], log[:, 8])
    ax_map.legend(fontsize="small")
    ax_err.set_xlabel("t [s]")
    ax_err.set_ylabel("distance error [m]")
    return _save(fig, path)


def plot_joint_profiles(times, q, v, a, path) -> Path:
    """Position, velocity and acceleration of every joint."""
    fig = Figure(figsize=(8, 9))
    axes = fig.subplots(3, 1, sharex=True)
    for ax, values, label in zip(axes, (q, v, a), ("q [rad]", "v [rad/s]", "a [rad/s^2]")):
        for i in range(values.shape[1]):
            ax.plot(times, values[:, i], label=f"joint {i}")
        ax.set_ylabel(label)
    axes[0].legend(fontsize="small", ncol=4)
    axes[-1].set_xlabel("t [s]")
    return _save(fig, path)


def plot_tracking(log: TrackingLog, path) -> Path:
    """Reference vs actual positions, and joint efforts."""
    fig = Figure(figsize=(8, 7))
    ax_q, ax_tau = fig.subplots(2, 1, sharex=True)
    times = log.times
    q_ref, q_act, torque = log.stack("q_ref"), log.stack("q_act"), log.stack("torque")
    for i in range(q_ref.shape[1]):
        (line,) = ax_q.plot(times, q_ref[:, i], "--", linewidth=1.0)
        ax_q.plot(times, q_act[:, i], color=line.get_color(), label=f"joint {i}")
        ax_tau.plot(times, torque[:, i], color=line.get_color())
    ax_q.set_ylabel("q [rad]")
    ax_q.legend(fontsize="small", ncol=4)
    ax_tau.set_ylabel("effort [Nm]")
    ax_tau.set_xlabel("t [s]")
    return _save(fig, path)
