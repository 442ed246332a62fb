"""Circular obstacles, clearance geometry and grid collision tagging."""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DegenerateDirection

DEGENERATE_DISTANCE = 1e-12


@dataclass(frozen=True)
class Obstacle:
    center: tuple
    radius: float

    def __post_init__(self):
        cx, cy = (float(v) for v in self.center)
        if not (math.isfinite(cx) and math.isfinite(cy)):
            raise ValueError("obstacle center must be finite")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"obstacle radius must be > 0, got {self.radius!r}")
        object.__setattr__(self, "center", (cx, cy))
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True)
class ObstacleWorld:
    obstacles: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    def __len__(self):
        return len(self.obstacles)

    def __iter__(self):
        return iter(self.obstacles)

    @property
    def centers(self):
        return np.array([o.center for o in self.obstacles], dtype=float).reshape(-1, 2)

    @property
    def radii(self):
        return np.array([o.radius for o in self.obstacles], dtype=float)

    def safety_distances(self, geom):
        return self.radii + geom.body_radius


@dataclass(frozen=True)
class GridSpec:
    """Task-space lattice; node (i, j) sits at ``origin + (dx*j, dy*i)``.

    Valid indices run over ``0..rows`` and ``0..cols`` inclusive, so the
    lattice holds ``(rows + 1) * (cols + 1)`` nodes.
    """

    origin: tuple
    dx: float
    dy: float
    rows: int
    cols: int

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("grid steps dx, dy must be > 0")
        if int(self.rows) != self.rows or self.rows < 1:
            raise ValueError("grid rows must be an integer >= 1")
        if int(self.cols) != self.cols or self.cols < 2:
            raise ValueError("grid cols must be an integer >= 2")
        object.__setattr__(self, "rows", int(self.rows))
        object.__setattr__(self, "cols", int(self.cols))

    @property
    def shape(self):
        return (self.rows + 1, self.cols + 1)

    def node(self, i, j):
        return (self.origin[0] + self.dx * j, self.origin[1] + self.dy * i)

    def node_coordinates(self):
        """Arrays ``X, Y`` of shape ``self.shape`` with every node position."""
        jj, ii = np.meshgrid(np.arange(self.cols + 1), np.arange(self.rows + 1))
        return self.origin[0] + self.dx * jj, self.origin[1] + self.dy * ii

    @property
    def extents(self):
        x0, y0 = self.origin
        return (x0, x0 + self.dx * self.cols, y0, y0 + self.dy * self.rows)


@dataclass(frozen=True)
class CollisionMatrix:
    blocked: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.blocked, dtype=bool)
        arr.setflags(write=False)
        object.__setattr__(self, "blocked", arr)

    @property
    def shape(self):
        return self.blocked.shape

    def __getitem__(self, idx):
        return self.blocked[idx]

    def as_int(self):
        return self.blocked.astype(np.uint8)


def inflation_radius(geom, obs):
    """Obstacle radius grown by the segment half-diagonal."""
    return obs.radius + geom.body_radius


def build_collision_matrix(grid, world, geom):
    X, Y = grid.node_coordinates()
    blocked = np.zeros(grid.shape, dtype=bool)
    for obs in world:
        # boundary counts as blocked
        blocked |= np.hypot(X - obs.center[0], Y - obs.center[1]) <= inflation_radius(geom, obs)
    return CollisionMatrix(blocked)


def clearance(p, obs):
    """Distance from ``p`` to the obstacle center and the outward unit normal."""
    diff = np.asarray(p, dtype=float) - np.asarray(obs.center, dtype=float)
    d = float(np.hypot(diff[0], diff[1]))
    if d < DEGENERATE_DISTANCE:
        raise DegenerateDirection(f"point {tuple(p)} coincides with obstacle center {obs.center}")
    return d, diff / d
