"""Random instance generators shared by the unit and acceptance tests."""

import math
from pathlib import Path

import numpy as np

from tenseplan.body_motion import clearance_margin
from tenseplan.ee_path import PathProblem
from tenseplan.kinematics import ManipulatorGeometry, forward_kinematics
from tenseplan.world import CollisionMatrix, GridSpec, Obstacle, ObstacleWorld

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

# criterion number -> (passed, detail); printed at the end of the session
ACCEPTANCE = {}


def random_scene(rng, n_range=(3, 7), m_range=(1, 4), gap=(0.01, 0.15)):
    """Chain plus obstacles placed just outside the safety distance of random joints."""
    n = int(rng.integers(*n_range))
    m = int(rng.integers(*m_range))
    geom = ManipulatorGeometry(n, rng.uniform(0.1, 0.4), rng.uniform(0.3, 0.6))
    q = rng.uniform(-0.8, 0.8, n)
    joints = forward_kinematics(geom, q).joints
    obs = []
    while len(obs) < m:
        i = int(rng.integers(1, n)) if n > 1 else 0
        r = rng.uniform(0.1, 0.5)
        ang = rng.uniform(0, 2 * math.pi)
        c = joints[i] + (r + geom.body_radius + rng.uniform(*gap)) * np.array([math.cos(ang), math.sin(ang)])
        o = Obstacle(tuple(c), r)
        if clearance_margin(geom, q, ObstacleWorld(obs + [o])) > 0:
            obs.append(o)
    ang = rng.uniform(0, 2 * math.pi)
    dp = rng.uniform(0.05, 0.3) * np.array([math.cos(ang), math.sin(ang)])
    return geom, q, dp, ObstacleWorld(obs)


def random_path_problem(rng, rows, cols, density, dx=None, dy=None):
    """Grid with a random blocked set and unblocked endpoints."""
    dx = rng.uniform(0.02, 0.2) if dx is None else dx
    dy = rng.uniform(0.02, 0.2) if dy is None else dy
    grid = GridSpec((0.0, 0.0), dx, dy, rows, cols)
    B = rng.random(grid.shape) < density
    start = int(rng.integers(0, rows + 1))
    goal = int(rng.integers(0, rows + 1))
    B[start, 0] = False
    B[goal, -1] = False
    return PathProblem(grid, CollisionMatrix(B), start, goal)
