"""Collision-free end-effector paths by discrete dynamic programming.

A path visits exactly one lattice node per column, moving left to right, and
may jump to any row between neighbouring columns.  The cost of a jump is the
Euclidean distance between the two nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import CorridorInfeasible, InvalidEndpoint, NoFeasiblePath
from .world import CollisionMatrix, GridSpec

NO_PREDECESSOR = -1


@dataclass(frozen=True)
class PathProblem:
    grid: GridSpec
    blocked: CollisionMatrix
    start_row: int
    goal_row: int

    def __post_init__(self):
        if self.blocked.shape != self.grid.shape:
            raise ValueError(
                f"collision matrix shape {self.blocked.shape} does not match grid {self.grid.shape}"
            )
        for name in ("start_row", "goal_row"):
            row = getattr(self, name)
            if int(row) != row or not 0 <= row <= self.grid.rows:
                raise InvalidEndpoint(f"{name}={row!r} outside 0..{self.grid.rows}")
            object.__setattr__(self, name, int(row))


@dataclass(frozen=True)
class GridPath:
    row_indices: tuple
    total_cost: float
    relaxations: int = 0

    def __len__(self):
        return len(self.row_indices)


@dataclass(frozen=True)
class DPTable:
    best_cost: np.ndarray    # (rows + 1, cols + 1), +inf where unreachable
    predecessor: np.ndarray  # same shape, row index in the previous column
    relaxations: int


def step_cost(grid, i, i_next):
    return math.sqrt(grid.dy ** 2 * (i_next - i) ** 2 + grid.dx ** 2)


def _step_cost_table(grid):
    d = np.arange(grid.rows + 1, dtype=float)
    di = d[None, :] - d[:, None]
    return np.sqrt(grid.dy ** 2 * di ** 2 + grid.dx ** 2)


def solve_dp(problem, allowed=None):
    """Forward pass of the column recurrence.

    ``allowed`` optionally restricts the searchable nodes (same shape as the
    grid); blocked nodes are always excluded.  ``relaxations`` counts the
    (source, target) node pairs examined.
    """
    grid = problem.grid
    R, C = grid.shape
    usable = ~problem.blocked.blocked
    if allowed is not None:
        usable = usable & np.asarray(allowed, dtype=bool)
    usable = usable.copy()
    usable[:, 0] = False
    usable[problem.start_row, 0] = True
    goal_ok = usable[problem.goal_row, -1]
    usable[:, -1] = False
    usable[problem.goal_row, -1] = goal_ok

    W = _step_cost_table(grid)
    cost = np.full((R, C), np.inf)
    pred = np.full((R, C), NO_PREDECESSOR, dtype=int)
    cost[problem.start_row, 0] = 0.0
    relaxations = 0

    for j in range(C - 1):
        src = np.flatnonzero(np.isfinite(cost[:, j]))
        dst = np.flatnonzero(usable[:, j + 1])
        if src.size == 0 or dst.size == 0:
            break
        relaxations += src.size * dst.size
        cand = cost[src, j][:, None] + W[np.ix_(src, dst)]
        # argmin returns the first minimum, i.e. the smallest source row
        best = np.argmin(cand, axis=0)
        cost[dst, j + 1] = cand[best, np.arange(dst.size)]
        pred[dst, j + 1] = src[best]

    cost.setflags(write=False)
    pred.setflags(write=False)
    return DPTable(cost, pred, relaxations)


def _check_endpoints(problem):
    B = problem.blocked.blocked
    if B[problem.start_row, 0]:
        raise InvalidEndpoint(f"start node ({problem.start_row}, 0) is blocked")
    if B[problem.goal_row, -1]:
        raise InvalidEndpoint(f"goal node ({problem.goal_row}, {problem.grid.cols}) is blocked")


def _backtrack(problem, table, exc=NoFeasiblePath):
    cost = table.best_cost
    reach = np.isfinite(cost).any(axis=0)
    if not reach.all():
        col = int(np.argmin(reach))
        raise exc(f"no reachable unblocked node in column {col}")
    goal_cost = cost[problem.goal_row, -1]
    if not np.isfinite(goal_cost):
        raise exc(f"goal node ({problem.goal_row}, {problem.grid.cols}) unreachable")
    rows = [problem.goal_row]
    for j in range(problem.grid.cols, 0, -1):
        rows.append(int(table.predecessor[rows[-1], j]))
    rows.reverse()
    return GridPath(tuple(rows), float(goal_cost), table.relaxations)


def plan_path(problem):
    """Globally shortest column-monotone path through unblocked nodes."""
    _check_endpoints(problem)
    return _backtrack(problem, solve_dp(problem))


def _coarse_problem(problem, factor):
    grid = problem.grid
    R, C = grid.shape
    Rc, Cc = -(-R // factor), -(-C // factor)
    if Cc < 3 or Rc < 2:
        raise ValueError(
            f"coarse_factor={factor} leaves a {Rc}x{Cc} coarse lattice; need at least 2x3"
        )
    B = problem.blocked.blocked
    pad = np.ones((Rc * factor, Cc * factor), dtype=bool)
    pad[:R, :C] = B
    # optimistic: a cell is blocked only when all of its fine nodes are
    coarse_blocked = pad.reshape(Rc, factor, Cc, factor).all(axis=(1, 3))
    coarse_grid = GridSpec(grid.origin, grid.dx * factor, grid.dy * factor, Rc - 1, Cc - 1)
    return PathProblem(
        coarse_grid,
        CollisionMatrix(coarse_blocked),
        problem.start_row // factor,
        problem.goal_row // factor,
    )


def coarse_corridor(problem, coarse_factor, corridor_margin):
    """Solve the coarse lattice and expand its path into a fine-node mask.

    Returns ``(mask, coarse_path)``.
    """
    if int(coarse_factor) != coarse_factor or coarse_factor < 2:
        raise ValueError("coarse_factor must be an integer >= 2")
    if int(corridor_margin) != corridor_margin or corridor_margin < 0:
        raise ValueError("corridor_margin must be an integer >= 0")
    k, m = int(coarse_factor), int(corridor_margin)
    coarse = _coarse_problem(problem, k)
    coarse_path = _backtrack(coarse, solve_dp(coarse))

    R, C = problem.grid.shape
    mask = np.zeros((R, C), dtype=bool)
    for v, u in enumerate(coarse_path.row_indices):
        lo = max(0, (u - m) * k)
        hi = min(R, (u + m + 1) * k)
        mask[lo:hi, v * k:min(C, (v + 1) * k)] = True
    return mask, coarse_path


def plan_path_coarse_to_fine(problem, coarse_factor=4, corridor_margin=1):
    """Two-level search: coarse cells first, then fine DP inside their corridor.

    The result is always feasible at full resolution but may cost more than
    :func:`plan_path` when the fine optimum leaves the corridor.
    ``relaxations`` covers both levels.
    """
    _check_endpoints(problem)
    mask, coarse_path = coarse_corridor(problem, coarse_factor, corridor_margin)
    table = solve_dp(problem, allowed=mask)
    fine = _backtrack(problem, table, exc=CorridorInfeasible)
    return GridPath(fine.row_indices, fine.total_cost, coarse_path.relaxations + table.relaxations)


def path_to_waypoints(grid, path):
    """Task-space coordinates of the path nodes, one row per column."""
    rows = np.asarray(path.row_indices, dtype=float)
    cols = np.arange(rows.size, dtype=float)
    return np.column_stack([grid.origin[0] + grid.dx * cols, grid.origin[1] + grid.dy * rows])


def path_cost(grid, rows):
    """Sum of step costs along a row sequence, accumulated left to right."""
    total = 0.0
    for i, i_next in zip(rows[:-1], rows[1:]):
        total += step_cost(grid, i, i_next)
    return total
