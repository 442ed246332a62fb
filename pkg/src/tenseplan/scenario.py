"""Scenario documents (TOML) and their validation.

Example document::

    [manipulator]
    n = 5
    a = 0.3
    b = 0.5
    q0 = [0.6, -0.3, -0.3, -0.2, 0.1]

    [[obstacles]]
    cx = 3.0
    cy = 1.0
    r = 0.4

    [goal]
    x = 4.2
    y = 0.5

    [grid]
    x0 = 3.0
    y0 = -1.0
    dx = 0.06
    dy = 0.1
    rows = 20
    cols = 20

    [solver]          # optional
    eq_tol = 1e-8
    viol_tol = 1e-10
    max_iters = 0     # 0 -> automatic (2*n*m)
    max_step = 0.05   # 0 -> 0.1*b

    [coarse]          # optional
    enabled = false
    factor = 4
    margin = 2
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import math
import sys

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .body_motion import SolverSettings, clearance_margin
from .errors import ParseError, ValidationError
from .kinematics import ManipulatorGeometry, forward_kinematics
from .world import GridSpec, Obstacle, ObstacleWorld, build_collision_matrix

SCHEMA = {
    "manipulator": {"n", "a", "b", "q0"},
    "obstacles": {"cx", "cy", "r"},
    "goal": {"x", "y"},
    "grid": {"x0", "y0", "dx", "dy", "rows", "cols"},
    "solver": {"eq_tol", "viol_tol", "max_iters", "max_step"},
    "coarse": {"enabled", "factor", "margin"},
}


@dataclass(frozen=True)
class CoarseOptions:
    enabled: bool = False
    factor: int = 4
    margin: int = 2


@dataclass(frozen=True)
class Scenario:
    geometry: ManipulatorGeometry
    q0: tuple
    world: ObstacleWorld
    goal: tuple
    grid: GridSpec
    settings: SolverSettings = field(default_factory=SolverSettings)
    coarse: CoarseOptions = field(default_factory=CoarseOptions)

    @property
    def start_point(self):
        return tuple(forward_kinematics(self.geometry, self.q0).end_effector)


@dataclass(frozen=True)
class Snap:
    row: int
    distance: float


def snap_to_column(grid, blocked, point, col):
    """Nearest unblocked node of column ``col`` to ``point``; ties go to the lower row."""
    x = grid.origin[0] + grid.dx * col
    ys = grid.origin[1] + grid.dy * np.arange(grid.rows + 1)
    dist = np.hypot(ys - point[1], x - point[0])
    dist[blocked.blocked[:, col]] = np.inf
    row = int(np.argmin(dist))
    return Snap(row, float(dist[row]))


def _number(table, key, path, integer=False):
    if key not in table:
        raise ParseError(f"missing field {path}.{key}")
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"field {path}.{key}: expected a number, got {type(v).__name__}")
    if integer:
        if isinstance(v, float) and not v.is_integer():
            raise ParseError(f"field {path}.{key}: expected an integer, got {v!r}")
        return int(v)
    if not math.isfinite(v):
        raise ValidationError(f"{path}.{key} must be finite")
    return float(v)


def _section(doc, name, required=True):
    if name not in doc:
        if required:
            raise ParseError(f"missing section [{name}]")
        return {}
    tab = doc[name]
    if not isinstance(tab, dict):
        raise ParseError(f"[{name}] must be a table")
    _check_keys(tab, name)
    return tab


def _check_keys(tab, name):
    unknown = set(tab) - SCHEMA[name]
    if unknown:
        raise ParseError(f"unknown field(s) in [{name}]: {', '.join(sorted(unknown))}")


def _positive(value, what):
    if not value > 0:
        raise ValidationError(f"{what} must be > 0, got {value!r}")
    return value


def parse_scenario(text):
    """Parse and validate a scenario document."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"malformed scenario document: {exc}") from exc
    unknown = set(doc) - set(SCHEMA)
    if unknown:
        raise ParseError(f"unknown section(s): {', '.join(sorted(unknown))}")

    man = _section(doc, "manipulator")
    n = _number(man, "n", "manipulator", integer=True)
    if n < 1:
        raise ValidationError(f"manipulator.n must be >= 1, got {n}")
    a = _positive(_number(man, "a", "manipulator"), "manipulator.a")
    b = _positive(_number(man, "b", "manipulator"), "manipulator.b")
    if "q0" not in man:
        raise ParseError("missing field manipulator.q0")
    q0 = man["q0"]
    if not isinstance(q0, list):
        raise ParseError("field manipulator.q0: expected an array")
    for k, v in enumerate(q0):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"field manipulator.q0[{k}]: expected a number, got {type(v).__name__}")
        if not math.isfinite(v):
            raise ValidationError(f"manipulator.q0[{k}] must be finite")
    q0 = tuple(float(v) for v in q0)
    if len(q0) != n:
        raise ValidationError(f"manipulator.q0 has {len(q0)} entries but n = {n}")
    geom = ManipulatorGeometry(n, a, b)

    raw_obs = doc.get("obstacles", [])
    if not isinstance(raw_obs, list):
        raise ParseError("obstacles must be an array of tables")
    obstacles = []
    for k, o in enumerate(raw_obs):
        path = f"obstacles[{k}]"
        if not isinstance(o, dict):
            raise ParseError(f"{path} must be a table")
        unknown = set(o) - SCHEMA["obstacles"]
        if unknown:
            raise ParseError(f"unknown field(s) in {path}: {', '.join(sorted(unknown))}")
        r = _positive(_number(o, "r", path), f"{path}.r")
        obstacles.append(Obstacle((_number(o, "cx", path), _number(o, "cy", path)), r))
    world = ObstacleWorld(obstacles)

    g = _section(doc, "goal")
    goal = (_number(g, "x", "goal"), _number(g, "y", "goal"))

    gr = _section(doc, "grid")
    dx = _positive(_number(gr, "dx", "grid"), "grid.dx")
    dy = _positive(_number(gr, "dy", "grid"), "grid.dy")
    rows = _number(gr, "rows", "grid", integer=True)
    cols = _number(gr, "cols", "grid", integer=True)
    if rows < 1:
        raise ValidationError(f"grid.rows must be >= 1, got {rows}")
    if cols < 2:
        raise ValidationError(f"grid.cols must be >= 2, got {cols}")
    grid = GridSpec((_number(gr, "x0", "grid"), _number(gr, "y0", "grid")), dx, dy, rows, cols)

    sv = _section(doc, "solver", required=False)
    settings = SolverSettings()
    if sv:
        kw = {}
        if "eq_tol" in sv:
            kw["eq_tolerance"] = _positive(_number(sv, "eq_tol", "solver"), "solver.eq_tol")
        if "viol_tol" in sv:
            kw["violation_tolerance"] = _positive(_number(sv, "viol_tol", "solver"), "solver.viol_tol")
        if "max_iters" in sv:
            it = _number(sv, "max_iters", "solver", integer=True)
            if it < 0:
                raise ValidationError("solver.max_iters must be >= 0")
            kw["max_active_set_iterations"] = it or None
        if "max_step" in sv:
            step = _number(sv, "max_step", "solver")
            if step < 0:
                raise ValidationError("solver.max_step must be >= 0")
            kw["max_step_norm"] = step or None
        settings = SolverSettings(**kw)

    co = _section(doc, "coarse", required=False)
    coarse = CoarseOptions()
    if co:
        enabled = co.get("enabled", False)
        if not isinstance(enabled, bool):
            raise ParseError("field coarse.enabled: expected a boolean")
        factor = _number(co, "factor", "coarse", integer=True) if "factor" in co else coarse.factor
        margin = _number(co, "margin", "coarse", integer=True) if "margin" in co else coarse.margin
        if factor < 2:
            raise ValidationError(f"coarse.factor must be >= 2, got {factor}")
        if margin < 0:
            raise ValidationError(f"coarse.margin must be >= 0, got {margin}")
        coarse = CoarseOptions(enabled, factor, margin)

    scenario = Scenario(geom, q0, world, goal, grid, settings, coarse)
    validate_scenario(scenario)
    return scenario


def validate_scenario(s):
    """Check the cross-field invariants; returns the (start, goal) snaps."""
    margin = clearance_margin(s.geometry, s.q0, s.world)
    if margin < -s.settings.violation_tolerance:
        raise ValidationError(
            f"initial configuration violates an obstacle safety distance (margin {margin:.6g})"
        )
    base = np.array([s.geometry.b, 0.0])
    reach = float(np.linalg.norm(np.asarray(s.goal) - base))
    if reach > s.geometry.reach:
        raise ValidationError(
            f"goal is {reach:.6g} from joint 1 but the chain reaches at most {s.geometry.reach:.6g}"
        )
    blocked = build_collision_matrix(s.grid, s.world, s.geometry)
    limit = max(s.grid.dx, s.grid.dy)
    snaps = []
    for name, point, col in (("start", s.start_point, 0), ("goal", s.goal, s.grid.cols)):
        snap = snap_to_column(s.grid, blocked, point, col)
        if not snap.distance <= limit:
            raise ValidationError(
                f"{name} point ({point[0]:.6g}, {point[1]:.6g}) is {snap.distance:.6g} from the "
                f"nearest unblocked node of grid column {col}; must be <= {limit:.6g}"
            )
        snaps.append(snap)
    return tuple(snaps)


def scenario_to_dict(s):
    doc = {
        "manipulator": {"n": s.geometry.n, "a": s.geometry.a, "b": s.geometry.b, "q0": list(s.q0)},
        "obstacles": [{"cx": o.center[0], "cy": o.center[1], "r": o.radius} for o in s.world],
        "goal": {"x": s.goal[0], "y": s.goal[1]},
        "grid": {"x0": s.grid.origin[0], "y0": s.grid.origin[1], "dx": s.grid.dx, "dy": s.grid.dy,
                 "rows": s.grid.rows, "cols": s.grid.cols},
        "solver": {
            "eq_tol": s.settings.eq_tolerance,
            "viol_tol": s.settings.violation_tolerance,
            "max_iters": s.settings.max_active_set_iterations or 0,
            "max_step": s.settings.max_step_norm or 0.0,
        },
        "coarse": {"enabled": s.coarse.enabled, "factor": s.coarse.factor, "margin": s.coarse.margin},
    }
    if not doc["obstacles"]:
        del doc["obstacles"]
    return doc


def serialize_scenario(s):
    return tomli_w.dumps(scenario_to_dict(s))


def load_scenario(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def with_overrides(s, coarse_factor=None, corridor=None, eq_tol=None, max_iters=None):
    """Apply CLI overrides; giving a coarse factor turns the two-level search on."""
    coarse = s.coarse
    if coarse_factor is not None:
        coarse = replace(coarse, enabled=True, factor=coarse_factor)
    if corridor is not None:
        coarse = replace(coarse, margin=corridor)
    settings = s.settings
    if eq_tol is not None:
        settings = replace(settings, eq_tolerance=eq_tol)
    if max_iters is not None:
        settings = replace(settings, max_active_set_iterations=max_iters)
    return replace(s, coarse=coarse, settings=settings)
