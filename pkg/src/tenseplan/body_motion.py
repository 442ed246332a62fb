"""Whole-body redundancy resolution with joint clearance constraints.

Each control step looks for the smallest joint increment ``dq`` that moves the
end-effector by ``dp`` (``J_e @ dq == dp``) while every joint center keeps at
least the safety distance from every obstacle, to first order::

    d_ij + e_ij . (J_i @ dq) >= r_j + sqrt(a^2 + b^2)

Violated clearances are turned into equalities, one per joint per pass, and
the enlarged equality system is solved again until nothing is violated.  A
final primal active-set pass releases constraints whose multipliers have the
wrong sign so that the returned step is the true minimum-norm solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import linprog

from .errors import InconsistentConstraints, IterationLimit, SingularJacobian, SolverError
from .kinematics import forward_kinematics, jacobians, joint_vector
from .world import ObstacleWorld, clearance

SINGULAR_CONDITION = 1e12
LSTSQ_RCOND = 1e-12


@dataclass(frozen=True)
class SolverSettings:
    eq_tolerance: float = 1e-8
    violation_tolerance: float = 1e-10
    max_active_set_iterations: int | None = None  # None -> 2*n*m
    max_step_norm: float | None = None  # task-space sub-step cap; None -> 0.1*b

    def __post_init__(self):
        for name in ("eq_tolerance", "violation_tolerance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_active_set_iterations is not None and self.max_active_set_iterations < 1:
            raise ValueError("max_active_set_iterations must be >= 1")
        if self.max_step_norm is not None and not self.max_step_norm > 0:
            raise ValueError("max_step_norm must be > 0")

    def iteration_limit(self, n, m):
        if self.max_active_set_iterations is not None:
            return int(self.max_active_set_iterations)
        return max(2 * n * m, 1)

    def substep_length(self, geom):
        return self.max_step_norm if self.max_step_norm is not None else 0.1 * geom.b


@dataclass(frozen=True)
class MotionRequest:
    geom: object
    q: np.ndarray
    dp: np.ndarray
    world: ObstacleWorld = field(default_factory=ObstacleWorld)

    def __post_init__(self):
        object.__setattr__(self, "q", joint_vector(self.geom, self.q))
        dp = np.asarray(self.dp, dtype=float).reshape(-1)
        if dp.size != 2 or not np.all(np.isfinite(dp)):
            raise ValueError("dp must be a finite planar displacement")
        object.__setattr__(self, "dp", dp)


@dataclass(frozen=True)
class ConstraintRow:
    joint_index: int
    obstacle_index: int
    normal: np.ndarray
    row: np.ndarray
    current_distance: float
    safety_distance: float

    @property
    def margin(self):
        return self.current_distance - self.safety_distance

    @property
    def target(self):
        """Lower bound on ``row @ dq``."""
        return self.safety_distance - self.current_distance

    def violation(self, dq):
        return self.target - float(self.row @ dq)


@dataclass(frozen=True)
class ActiveSet:
    active_rows: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "active_rows", tuple(self.active_rows))

    def __len__(self):
        return len(self.active_rows)

    @property
    def J_a(self):
        if not self.active_rows:
            return np.zeros((0, 0))
        return np.vstack([r.row for r in self.active_rows])

    @property
    def d_a(self):
        return np.array([r.target for r in self.active_rows], dtype=float)

    @property
    def keys(self):
        return tuple((r.joint_index, r.obstacle_index) for r in self.active_rows)


@dataclass(frozen=True)
class MotionStep:
    dq: np.ndarray
    lagrange_eq: np.ndarray
    lagrange_ineq: np.ndarray
    active_set: ActiveSet
    kkt_residual: float
    iterations: int = 0

    @property
    def objective(self):
        return float(self.dq @ self.dq)


def least_norm_step(J_e, dp):
    """Minimum-norm ``dq`` with ``J_e @ dq == dp`` (Jacobian pseudo-inverse)."""
    dq, _ = _least_norm(J_e, dp)
    return dq


def _least_norm(J_e, dp):
    J_e = np.asarray(J_e, dtype=float)
    dp = np.asarray(dp, dtype=float)
    G = J_e @ J_e.T
    cond = np.linalg.cond(G)
    if not math.isfinite(cond) or cond > SINGULAR_CONDITION:
        raise SingularJacobian(f"J_e J_e^T is singular (condition number {cond:.3g})")
    lam = np.linalg.solve(G, dp)
    return J_e.T @ lam, lam


def evaluate_constraints(geom, q, world):
    """All joint/obstacle clearance rows, joint-major then obstacle order."""
    q = joint_vector(geom, q)
    if len(world) == 0:
        return []
    pose = forward_kinematics(geom, q)
    jac = jacobians(geom, q)
    rows = []
    for i in range(geom.n):
        for j, obs in enumerate(world):
            d, e = clearance(pose.joints[i], obs)
            rows.append(ConstraintRow(
                joint_index=i,
                obstacle_index=j,
                normal=e,
                row=e @ jac.joint_jacobians[i],
                current_distance=d,
                safety_distance=obs.radius + geom.body_radius,
            ))
    return rows


def solve_kkt(J_e, dp, active, eq_tolerance=1e-8):
    """Minimum-norm ``dq`` meeting the tracking and active clearance equalities.

    Stationarity ``dq = J_e^T lam + J_a^T mu``; the stacked system is solved by
    SVD least squares and rejected when its residual exceeds ``eq_tolerance``.
    """
    J_e = np.asarray(J_e, dtype=float)
    dp = np.asarray(dp, dtype=float)
    if len(active) == 0:
        dq, lam = _least_norm(J_e, dp)
        res = float(np.linalg.norm(J_e @ dq - dp))
        return MotionStep(dq, lam, np.zeros(0), active, res)

    A = np.vstack([J_e, active.J_a])
    rhs = np.concatenate([dp, active.d_a])
    dq, *_ = np.linalg.lstsq(A, rhs, rcond=LSTSQ_RCOND)
    res = float(np.linalg.norm(A @ dq - rhs))
    if not res <= eq_tolerance:
        raise InconsistentConstraints(
            f"tracking and {len(active)} active clearance rows cannot hold together "
            f"(residual {res:.3e})"
        )
    mult, *_ = np.linalg.lstsq(A.T, dq, rcond=LSTSQ_RCOND)
    return MotionStep(dq, mult[:2], mult[2:], active, res)


def _stack(rows, n):
    if not rows:
        return np.zeros((0, n)), np.zeros(0)
    return np.vstack([r.row for r in rows]), np.array([r.target for r in rows])


def _feasible_point(J_e, dp, R, t):
    """Any ``dq`` meeting tracking and every linearized clearance, by LP."""
    n = J_e.shape[1]
    # minimize sum |dq| with dq = u - v, u, v >= 0
    res = linprog(
        np.ones(2 * n),
        A_ub=-np.hstack([R, -R]), b_ub=-t,
        A_eq=np.hstack([J_e, -J_e]), b_eq=dp,
        bounds=(0, None), method="highs",
    )
    if res.status != 0:
        raise InconsistentConstraints(f"no joint increment satisfies tracking and clearance ({res.message})")
    return res.x[:n] - res.x[n:]


def _release_wrong_signs(J_e, dp, rows, R, t, working, x, settings, limit):
    """Primal active-set pass from a feasible point ``x``.

    Drops the active row with the most negative multiplier, walks toward the
    relaxed minimizer and stops at the first clearance row that would be
    crossed, adding it back.  Ends when every multiplier is non-negative.
    """
    tol = settings.violation_tolerance
    for it in range(limit):
        cand = solve_kkt(J_e, dp, ActiveSet([rows[k] for k in working]), settings.eq_tolerance)
        p = cand.dq - x
        if np.linalg.norm(p) <= 1e-13 * (1.0 + np.linalg.norm(x)):
            mu = cand.lagrange_ineq
            if mu.size == 0 or mu.min() >= -tol:
                return cand, it
            working = working[:int(np.argmin(mu))] + working[int(np.argmin(mu)) + 1:]
            x = cand.dq
            continue
        Rp = R @ p
        slack = np.maximum(R @ x - t, 0.0)
        alpha, block = 1.0, None
        for k in np.flatnonzero(Rp < -1e-15):
            if k in working:
                continue
            ratio = slack[k] / -Rp[k]
            if ratio < alpha:
                alpha, block = ratio, int(k)
        x = x + alpha * p
        if block is not None:
            working = working + [block]
    raise IterationLimit(f"active-set release pass exceeded {limit} iterations")


def resolve_step(req, settings=None):
    """One redundancy-resolution step for ``req``.

    1. solve the tracking equality alone;
    2. test every clearance row at the candidate; stop if none is violated;
    3. for each joint, promote its most violated row to an equality;
    4. solve the enlarged equality system and go back to 2.
    """
    settings = settings or SolverSettings()
    geom = req.geom
    J_e = jacobians(geom, req.q).ee_jacobian
    rows = evaluate_constraints(geom, req.q, req.world)
    R, t = _stack(rows, geom.n)
    limit = settings.iteration_limit(geom.n, len(req.world))
    tol = settings.violation_tolerance

    step = solve_kkt(J_e, req.dp, ActiveSet(), settings.eq_tolerance)
    if not rows:
        return step

    try:
        step, working, iterations = _promote_violated(J_e, req.dp, rows, R, t, geom.n,
                                                      len(req.world), step, settings, limit)
        start = step.dq
    except (InconsistentConstraints, IterationLimit):
        # greedy promotion over-constrained the step; restart from any feasible point
        start = _feasible_point(J_e, req.dp, R, t)
        working, iterations, step = [], 0, None

    if working or step is None:
        step, extra = _release_wrong_signs(J_e, req.dp, rows, R, t, working, start, settings,
                                           4 * limit + len(rows))
        iterations += extra

    worst = float(np.max(t - R @ step.dq))
    if worst > tol:
        raise SolverError(f"returned step violates a clearance row by {worst:.3e}")
    return MotionStep(step.dq, step.lagrange_eq, step.lagrange_ineq, step.active_set,
                      step.kkt_residual, iterations=iterations)


def _promote_violated(J_e, dp, rows, R, t, n, m, step, settings, limit):
    tol = settings.violation_tolerance
    working = []
    for it in range(limit + 1):
        viol = t - R @ step.dq
        viol[working] = -np.inf
        if not np.any(viol > tol):
            return step, working, it
        if it == limit:
            break
        added = []
        for i in range(n):
            # rows are ordered by obstacle within a joint, so ties go to the lower index
            k = int(np.argmax(viol[i * m:(i + 1) * m])) + i * m
            if viol[k] > tol:
                added.append(k)
        working = working + added
        step = solve_kkt(J_e, dp, ActiveSet([rows[k] for k in working]), settings.eq_tolerance)
    raise IterationLimit(f"clearance loop exceeded {limit} iterations")


@dataclass(frozen=True)
class TrajectoryRecord:
    q: np.ndarray
    end_effector: np.ndarray
    target: np.ndarray
    step: MotionStep
    min_margin: float  # exact clearance minus safety distance after the step


@dataclass
class Trajectory:
    q0: np.ndarray
    records: list = field(default_factory=list)
    perturbations: int = 0

    def __len__(self):
        return len(self.records)

    @property
    def configurations(self):
        return [self.q0] + [r.q for r in self.records]

    @property
    def final_q(self):
        return self.records[-1].q if self.records else self.q0

    @property
    def total_joint_motion(self):
        total = 0.0
        for r in self.records:
            total += float(np.linalg.norm(r.step.dq))
        return total


def clearance_margin(geom, q, world):
    """Smallest exact joint clearance minus the safety distance (+inf if no obstacles)."""
    if len(world) == 0:
        return math.inf
    joints = forward_kinematics(geom, q).joints
    d = np.hypot(joints[:, None, 0] - world.centers[None, :, 0],
                 joints[:, None, 1] - world.centers[None, :, 1])
    return float(np.min(d - world.safety_distances(geom)[None, :]))


def _subtargets(start, waypoints, h):
    out = []
    prev = np.asarray(start, dtype=float)
    for wp in waypoints:
        wp = np.asarray(wp, dtype=float)
        length = float(np.linalg.norm(wp - prev))
        if length > 0:
            pieces = max(1, math.ceil(length / h))
            for s in range(1, pieces + 1):
                out.append(prev + (wp - prev) * (s / pieces))
        prev = wp
    return out


def track_waypoints(geom, q0, waypoints, world, settings=None, rng=None,
                    settle_tolerance=1e-10, max_settle_steps=25):
    """Drive the end-effector through ``waypoints`` with repeated redundancy steps.

    Segments are cut so each commanded displacement is at most the sub-step
    length; every displacement is measured from the actual end-effector
    position so linearization error does not accumulate.  After the last
    waypoint, corrective steps run until the error drops below
    ``settle_tolerance``.  When ``rng`` is given, a kinematic singularity is
    escaped by a small random joint perturbation instead of failing.
    """
    settings = settings or SolverSettings()
    world = world if world is not None else ObstacleWorld()
    q = joint_vector(geom, q0).copy()
    traj = Trajectory(q0=q.copy())
    waypoints = np.asarray(waypoints, dtype=float).reshape(-1, 2)
    if waypoints.shape[0] == 0:
        return traj

    h = settings.substep_length(geom)
    ee = forward_kinematics(geom, q).end_effector
    goal = waypoints[-1]
    targets = _subtargets(ee, waypoints, h)
    settle = 0
    k = 0
    while True:
        if k < len(targets):
            target = targets[k]
        else:
            if np.linalg.norm(goal - ee) <= settle_tolerance or settle >= max_settle_steps:
                break
            target = goal
            settle += 1
        step, q = _step_with_escape(geom, q, target, world, settings, rng, traj)
        q = q + step.dq
        ee = forward_kinematics(geom, q).end_effector
        traj.records.append(TrajectoryRecord(
            q=q.copy(), end_effector=ee.copy(), target=np.array(target), step=step,
            min_margin=clearance_margin(geom, q, world),
        ))
        k += 1
    return traj


def _step_with_escape(geom, q, target, world, settings, rng, traj, attempts=5):
    index = len(traj)
    for attempt in range(attempts + 1):
        dp = target - forward_kinematics(geom, q).end_effector
        try:
            return resolve_step(MotionRequest(geom, q, dp, world), settings), q
        except SingularJacobian as exc:
            if rng is None or attempt == attempts:
                raise _annotate(exc, index) from exc
            q = q + rng.normal(scale=1e-3, size=q.size)
            traj.perturbations += 1
        except SolverError as exc:
            raise _annotate(exc, index) from exc
    raise AssertionError("unreachable")


def _annotate(exc, index):
    new = type(exc)(f"step {index}: {exc}")
    new.step_index = index
    return new
