"""Two-stage planning: end-effector path first, then whole-body motion."""

from __future__ import annotations

from dataclasses import dataclass, field
import math
import time

import numpy as np

from .body_motion import clearance_margin, track_waypoints
from .ee_path import PathProblem, path_to_waypoints, plan_path, plan_path_coarse_to_fine
from .errors import PlanningError, StageError
from .kinematics import forward_kinematics
from .scenario import snap_to_column, validate_scenario
from .world import build_collision_matrix, inflation_radius


@dataclass
class RunReport:
    scenario: object
    blocked: object
    path: object
    waypoints: np.ndarray
    trajectory: object
    summary: dict = field(default_factory=dict)

    def step_rows(self):
        """Per-step records as plain tuples (step, q, ee, dq_norm, active_count, min_margin)."""
        out = []
        for k, rec in enumerate(self.trajectory.records, start=1):
            out.append((k, rec.q, rec.end_effector, float(np.linalg.norm(rec.step.dq)),
                        len(rec.step.active_set), rec.min_margin))
        return out


def summarize(report, wall_time=0.0):
    traj = report.trajectory
    records = traj.records
    final_ee = records[-1].end_effector if records else None
    goal = np.asarray(report.scenario.goal)
    if final_ee is None:
        final_ee = forward_kinematics(report.scenario.geometry, traj.q0).end_effector
    margins = [r.min_margin for r in records]
    min_margin = min(margins) if margins else clearance_margin(
        report.scenario.geometry, traj.q0, report.scenario.world)
    return {
        "status": "ok",
        "path_cost": report.path.total_cost,
        "total_joint_motion": sum(float(np.linalg.norm(r.step.dq)) for r in records),
        "final_error": float(np.linalg.norm(final_ee - goal)),
        "steps": len(records),
        "max_active_count": max((len(r.step.active_set) for r in records), default=0),
        "activated_steps": sum(1 for r in records if len(r.step.active_set)),
        "min_margin": None if math.isinf(min_margin) else min_margin,
        "perturbations": traj.perturbations,
        "relaxations": report.path.relaxations,
        "wall_time": wall_time,
    }


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PlanningError as exc:
        raise StageError(name, exc) from exc


def run_pipeline(s, rng=None):
    """Plan the end-effector path over the grid, then track it with the body solver.

    ``rng`` is only used to escape kinematic singularities during tracking.
    """
    t0 = time.perf_counter()
    _stage("validate", validate_scenario, s)
    blocked = _stage("collision", build_collision_matrix, s.grid, s.world, s.geometry)
    start = snap_to_column(s.grid, blocked, s.start_point, 0)
    goal = snap_to_column(s.grid, blocked, s.goal, s.grid.cols)
    problem = _stage("path", PathProblem, s.grid, blocked, start.row, goal.row)
    if s.coarse.enabled:
        path = _stage("path", plan_path_coarse_to_fine, problem, s.coarse.factor, s.coarse.margin)
    else:
        path = _stage("path", plan_path, problem)
    waypoints = path_to_waypoints(s.grid, path)

    targets = waypoints
    if np.linalg.norm(waypoints[-1] - np.asarray(s.goal)) > 0:
        targets = np.vstack([waypoints, s.goal])
    traj = _stage("motion", track_waypoints, s.geometry, s.q0, targets, s.world, s.settings, rng=rng)

    report = RunReport(s, blocked, path, waypoints, traj)
    report.summary = summarize(report, time.perf_counter() - t0)
    report.summary["start_snap"] = start.distance
    report.summary["goal_snap"] = goal.distance
    return report


def plot_data(report, snapshot_every=10):
    """Numeric records describing the scene for external or built-in rendering."""
    s = report.scenario
    configs = report.trajectory.configurations
    picks = list(range(0, len(configs), max(1, snapshot_every)))
    if picks[-1] != len(configs) - 1:
        picks.append(len(configs) - 1)
    x0, x1, y0, y1 = s.grid.extents
    return {
        "obstacles": [
            {"cx": o.center[0], "cy": o.center[1], "r": o.radius,
             "r_inflated": inflation_radius(s.geometry, o)}
            for o in s.world
        ],
        "grid": {"xmin": x0, "xmax": x1, "ymin": y0, "ymax": y1,
                 "dx": s.grid.dx, "dy": s.grid.dy, "rows": s.grid.rows, "cols": s.grid.cols},
        "blocked": [[int(i), int(j)] for i, j in np.argwhere(report.blocked.blocked)],
        "path": report.waypoints.tolist(),
        "goal": list(s.goal),
        "snapshots": [
            {"step": k, "points": forward_kinematics(s.geometry, configs[k]).points.tolist()}
            for k in picks
        ],
    }
