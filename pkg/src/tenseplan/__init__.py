"""Collision-free motion planning for planar multi-segment tensegrity manipulators.

Planning runs in two stages: a shortest end-effector path over a task-space
grid that avoids inflated obstacles, then a step-by-step whole-body motion
that tracks the path while every joint keeps its distance from the obstacles.
"""

from .body_motion import (
    ActiveSet, ConstraintRow, MotionRequest, MotionStep, SolverSettings, Trajectory,
    TrajectoryRecord, clearance_margin, evaluate_constraints, least_norm_step, resolve_step,
    solve_kkt, track_waypoints,
)
from .ee_path import (
    DPTable, GridPath, PathProblem, coarse_corridor, path_cost, path_to_waypoints, plan_path,
    plan_path_coarse_to_fine, solve_dp, step_cost,
)
from .errors import *  # noqa: F401,F403
from .kinematics import (
    ChainPose, JacobianPair, JointState, ManipulatorGeometry, forward_kinematics, jacobians,
)
from .world import (
    CollisionMatrix, GridSpec, Obstacle, ObstacleWorld, build_collision_matrix, clearance,
    inflation_radius,
)

__version__ = "0.1.0"
