"""Computed-torque control and payload model mismatch."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dynamics import JointState, inverse_dynamics
from .errors import DimensionError
from .model import LinkParams, RobotModel
from .trajectory import TrajectorySample

DEFAULT_KP = 100.0
DEFAULT_KV = 20.0


@dataclass(frozen=True, eq=False)
class ControllerGains:
    """Diagonal PD gains of the outer loop: kp in 1/s^2, kv in 1/s."""

    kp: np.ndarray
    kv: np.ndarray

    def __post_init__(self):
        kp = np.array(self.kp, dtype=float).reshape(-1)
        kv = np.array(self.kv, dtype=float).reshape(-1)
        if kp.shape != kv.shape:
            raise DimensionError(f"kp and kv lengths differ ({kp.size} vs {kv.size})")
        for name, arr in (("kp", kp), ("kv", kv)):
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValueError(f"gains.{name}: every gain must be positive, got {arr.tolist()}")
            arr.setflags(write=False)
        object.__setattr__(self, "kp", kp)
        object.__setattr__(self, "kv", kv)

    @classmethod
    def uniform(cls, n: int, kp: float = DEFAULT_KP, kv: float = DEFAULT_KV) -> ControllerGains:
        return cls(kp=np.full(n, kp), kv=np.full(n, kv))

    def __eq__(self, other):
        if not isinstance(other, ControllerGains):
            return NotImplemented
        return np.array_equal(self.kp, other.kp) and np.array_equal(self.kv, other.kv)

    __hash__ = None


def commanded_acceleration(state: JointState, desired: TrajectorySample, gains: ControllerGains) -> np.ndarray:
    """qdd_d + Kv (qd_d - qd) + Kp (q_d - q)."""
    return (
        desired.qdd_d
        + gains.kv * (desired.qd_d - state.qd)
        + gains.kp * (desired.q_d - state.q)
    )


def computed_torque(model: RobotModel, state: JointState, desired: TrajectorySample,
                    gains: ControllerGains) -> np.ndarray:
    """Feedback-linearizing torque M(q) a + c(q, qd) + g(q).

    ``a`` is the PD-corrected reference acceleration. Since inverse dynamics
    is affine in acceleration, the whole law is a single RNE evaluation at
    (q, qd, a). With an exact model the joint errors obey
    e'' + Kv e' + Kp e = 0, independently per joint.
    """
    if gains.kp.size != model.n:
        raise DimensionError(f"gains sized for {gains.kp.size} joints, model has {model.n}")
    accel = commanded_acceleration(state, desired, gains)
    return inverse_dynamics(model, state.q, state.qd, accel)


def add_point_mass(link: LinkParams, mass: float, position) -> LinkParams:
    """Rigidly attach a point mass at ``position`` (link frame) to ``link``."""
    position = np.asarray(position, dtype=float)
    total = link.mass + mass
    com = (link.mass * link.com + mass * position) / total

    def shift(m, offset):
        # Parallel-axis term for a mass m displaced by ``offset`` from the new COM.
        return m * (offset @ offset * np.eye(3) - np.outer(offset, offset))

    inertia = link.inertia + shift(link.mass, link.com - com) + shift(mass, position - com)
    return replace(link, mass=total, com=com, inertia=inertia)


def apply_model_mismatch(plant: RobotModel, payload_mass: float) -> RobotModel:
    """Plant copy carrying a point payload at the tool point.

    The payload sits at the origin of the last link frame, which is the
    end-effector. A zero payload returns the plant unchanged.
    """
    payload_mass = float(payload_mass)
    if not payload_mass >= 0:
        raise ValueError(f"payload_mass must be >= 0, got {payload_mass}")
    if payload_mass == 0:
        return plant
    last = add_point_mass(plant.links[-1], payload_mass, np.zeros(3))
    return replace(plant, links=plant.links[:-1] + (last,), name=f"{plant.name}+payload")
