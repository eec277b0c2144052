"""Forward kinematics, geometric IK for the RRR arm, and the geometric Jacobian."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, UnreachableError
from .model import RobotModel

# Radial distance below which the target is treated as on the shoulder axis.
AXIS_TOL = 1e-12


def check_joint_vector(model: RobotModel, x, name: str = "q") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (model.n,):
        raise DimensionError(f"{name} must have shape ({model.n},), got {arr.shape}")
    return arr


def wrap_angle(x):
    """Wrap angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)


def dh_transform(a: float, alpha: float, d: float, theta: float) -> np.ndarray:
    """Homogeneous transform Rz(theta) Tz(d) Tx(a) Rx(alpha)."""
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(alpha), np.sin(alpha)
    return np.array([
        [ct, -st * ca, st * sa, a * ct],
        [st, ct * ca, -ct * sa, a * st],
        [0.0, sa, ca, d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def link_transforms(model: RobotModel, q) -> list[np.ndarray]:
    """Base-frame poses of frames 0..n (frame 0 is the base itself)."""
    q = check_joint_vector(model, q)
    frames = [np.eye(4)]
    for link, qi in zip(model.links, q):
        frames.append(frames[-1] @ dh_transform(link.a, link.alpha, link.d, qi + link.theta_offset))
    return frames


@dataclass(frozen=True, eq=False)
class Pose:
    position: np.ndarray
    rotation: np.ndarray


def forward_kinematics(model: RobotModel, q) -> Pose:
    tf = link_transforms(model, q)[-1]
    return Pose(position=tf[:3, 3].copy(), rotation=tf[:3, :3].copy())


def com_positions(model: RobotModel, q) -> np.ndarray:
    """Base-frame position of every link's center of mass, shape (n, 3)."""
    frames = link_transforms(model, q)[1:]
    return np.array([
        tf[:3, :3] @ link.com + tf[:3, 3] for tf, link in zip(frames, model.links)
    ])


def geometric_jacobian(model: RobotModel, q) -> np.ndarray:
    """6 x n Jacobian; rows 0-2 linear velocity, rows 3-5 angular velocity."""
    frames = link_transforms(model, q)
    p_end = frames[-1][:3, 3]
    jac = np.zeros((6, model.n))
    for i in range(model.n):
        z = frames[i][:3, 2]
        p = frames[i][:3, 3]
        jac[:3, i] = np.cross(z, p_end - p)
        jac[3:, i] = z
    return jac


class IkBranch(enum.Enum):
    """Elbow branch. ``UP`` selects the solution with q3 <= 0."""

    UP = "up"
    DOWN = "down"


class IkSolution(NamedTuple):
    q: np.ndarray
    singular: bool


def inverse_kinematics(model: RobotModel, target, branch: IkBranch = IkBranch.UP) -> IkSolution:
    """Closed-form position IK for the RRR topology of ``default_rrr_model``.

    The waist angle comes from atan2(y, x); shoulder and elbow solve the
    planar two-link problem in the (r, z - d1) plane. A target on the
    shoulder axis cannot fix the waist angle, so q1 is set to 0 and the
    solution is returned with ``singular=True``.

    Raises:
        UnreachableError: target lies outside the reachable annulus.
    """
    if model.n != 3:
        raise DimensionError(f"geometric IK needs a 3-link arm, got {model.n} links")
    target = np.asarray(target, dtype=float)
    if target.shape != (3,):
        raise DimensionError(f"target must be a 3-vector, got shape {target.shape}")
    l1, l2, l3 = model.links
    d1, a2, a3 = l1.d, l2.a, l3.a

    x, y, z = target
    r = np.hypot(x, y)
    singular = bool(r < AXIS_TOL)
    q1 = 0.0 if singular else np.arctan2(y, x)
    s = z - d1

    dist = np.hypot(r, s)
    reach_tol = 1e-12 * (a2 + a3)
    if dist > a2 + a3 + reach_tol or dist < abs(a2 - a3) - reach_tol:
        raise UnreachableError(
            f"target {target.tolist()} unreachable: distance {dist:.6f} m from the "
            f"shoulder outside [{abs(a2 - a3):.6f}, {a2 + a3:.6f}]"
        )

    cos3 = np.clip((r**2 + s**2 - a2**2 - a3**2) / (2 * a2 * a3), -1.0, 1.0)
    q3 = np.arccos(cos3)
    if branch is IkBranch.UP:
        q3 = -q3
    q2 = np.arctan2(s, r) - np.arctan2(a3 * np.sin(q3), a2 + a3 * np.cos(q3))

    # Remove the DH angle offsets so the result is in joint coordinates.
    q = np.array([q1, q2, q3]) - np.array([l.theta_offset for l in model.links])
    return IkSolution(q=wrap_angle(q), singular=singular)
