"""Direct and differential kinematics of the planar n-segment chain.

Each segment is a dual-triangle unit with half-base ``b`` and height ``a``.
Joint 1 sits at the fixed point ``(b, 0)``; consecutive joint centers are
``2b`` apart and the end-effector lies ``b`` beyond the last joint.  Headings
are raw cumulative sums of the joint angles (no wrapping).
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import DimensionError


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ManipulatorGeometry:
    n: int
    a: float
    b: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"segment count n must be a positive integer, got {self.n!r}")
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValueError(f"triangle parameter a must be > 0, got {self.a!r}")
        if not (math.isfinite(self.b) and self.b > 0):
            raise ValueError(f"triangle parameter b must be > 0, got {self.b!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def body_radius(self):
        """Half-diagonal of a segment triangle, sqrt(a^2 + b^2)."""
        return math.hypot(self.a, self.b)

    @property
    def reach(self):
        """Largest end-effector distance from joint 1, reached by the straight chain."""
        return self.b * (2 * self.n - 1)

    @property
    def is_redundant(self):
        return self.n > 2


@dataclass(frozen=True)
class JointState:
    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        if not np.all(np.isfinite(q)):
            raise ValueError("joint angles must be finite")
        object.__setattr__(self, "q", _frozen(q))

    def __len__(self):
        return self.q.size

    def __array__(self, dtype=None, copy=None):
        return self.q if dtype is None else self.q.astype(dtype)


@dataclass(frozen=True)
class ChainPose:
    joints: np.ndarray        # (n, 2)
    end_effector: np.ndarray  # (2,)

    @property
    def points(self):
        """Joint centers followed by the end-effector, shape (n + 1, 2)."""
        return np.vstack([self.joints, self.end_effector])


@dataclass(frozen=True)
class JacobianPair:
    joint_jacobians: np.ndarray  # (n, 2, n); entry i is J_i
    ee_jacobian: np.ndarray      # (2, n)


def joint_vector(geom, q):
    """Return ``q`` as a float vector, checking it against ``geom.n``."""
    if isinstance(q, JointState):
        q = q.q
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.size != geom.n:
        raise DimensionError(f"expected {geom.n} joint angles, got {q.size}")
    return q


def forward_kinematics(geom, q):
    q = joint_vector(geom, q)
    heading = np.cumsum(q)
    unit = np.column_stack([np.cos(heading), np.sin(heading)])
    joints = np.empty((geom.n, 2))
    joints[0] = (geom.b, 0.0)
    if geom.n > 1:
        joints[1:] = joints[0] + 2.0 * geom.b * np.cumsum(unit[:-1], axis=0)
    ee = joints[-1] + geom.b * unit[-1]
    return ChainPose(_frozen(joints), _frozen(ee))


def jacobians(geom, q):
    """Analytic Jacobians of every joint center and of the end-effector.

    Column ``k`` of ``J_i`` (zero-based) collects the link headings
    ``k .. i-1``, so ``J_i`` is zero in every column ``k >= i``.
    """
    q = joint_vector(geom, q)
    n = geom.n
    heading = np.cumsum(q)
    dunit = np.column_stack([-np.sin(heading), np.cos(heading)])

    # prefix[t] = sum of link derivative terms for headings 0 .. t-1
    prefix = np.zeros((n + 1, 2))
    prefix[1:] = np.cumsum(2.0 * geom.b * dunit, axis=0)

    i = np.arange(n)[:, None]
    k = np.arange(n)[None, :]
    # (n, n, 2): [i, k] -> prefix[i] - prefix[k] where k < i
    cols = (prefix[:n][:, None, :] - prefix[:n][None, :, :]) * (k < i)[..., None]
    joint_jac = np.transpose(cols, (0, 2, 1))

    ee_jac = joint_jac[-1] + geom.b * dunit[-1][:, None]
    return JacobianPair(_frozen(joint_jac), _frozen(ee_jac))
