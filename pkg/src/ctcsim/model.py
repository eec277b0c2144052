"""Kinematic and inertial description of serial revolute manipulators.

Each link carries standard (distal) Denavit-Hartenberg parameters plus the
rigid-body data of the body attached to that joint. COM and inertia are
expressed in the link's own DH frame, i.e. the frame at the distal end.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

STANDARD_GRAVITY = 9.81

# Segment lengths of the RRR arm (m), base to tool.
RRR_SEGMENT_LENGTHS = {
    "base": 0.060,
    "link1": 0.150,
    "link2": 0.300,
    "link3": 0.200,
    "link4": 0.050,
}

# Linear density used for the default slender-rod links (kg/m).
ROD_DENSITY = 5.0

_SYM_TOL = 1e-12


def _frozen(x, shape) -> np.ndarray:
    arr = np.array(x, dtype=float).reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LinkParams:
    """One revolute joint and the rigid link it drives.

    Attributes:
        a: link length (m)
        alpha: link twist (rad)
        d: link offset (m)
        theta_offset: added to the joint angle before building the DH transform (rad)
        mass: kg
        com: center of mass in the link frame (m)
        inertia: rotational inertia about the COM in the link frame (kg m^2)
    """

    a: float
    alpha: float
    d: float
    theta_offset: float = 0.0
    mass: float = 0.0
    com: np.ndarray = field(default_factory=lambda: np.zeros(3))
    inertia: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))

    def __post_init__(self):
        for name in ("a", "alpha", "d", "theta_offset", "mass"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "com", _frozen(self.com, (3,)))
        object.__setattr__(self, "inertia", _frozen(self.inertia, (3, 3)))

    def __eq__(self, other):
        if not isinstance(other, LinkParams):
            return NotImplemented
        return (
            (self.a, self.alpha, self.d, self.theta_offset, self.mass)
            == (other.a, other.alpha, other.d, other.theta_offset, other.mass)
            and np.array_equal(self.com, other.com)
            and np.array_equal(self.inertia, other.inertia)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class RobotModel:
    """An n-link serial chain of revolute joints."""

    links: tuple[LinkParams, ...]
    gravity: np.ndarray = field(
        default_factory=lambda: np.array([0.0, 0.0, -STANDARD_GRAVITY])
    )
    name: str = "robot"

    def __post_init__(self):
        links = tuple(self.links)
        if not links:
            raise ValueError("a robot needs at least one link")
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "gravity", _frozen(self.gravity, (3,)))

    @property
    def n(self) -> int:
        return len(self.links)

    def with_gravity(self, gravity) -> RobotModel:
        return replace(self, gravity=gravity)

    def __eq__(self, other):
        if not isinstance(other, RobotModel):
            return NotImplemented
        return (
            self.name == other.name
            and self.links == other.links
            and np.array_equal(self.gravity, other.gravity)
        )

    __hash__ = None


def rod_inertia(mass: float, length: float, axis: int) -> np.ndarray:
    """Inertia of a uniform slender rod about its COM; zero about its own axis."""
    transverse = mass * length**2 / 12.0
    inertia = np.diag([transverse] * 3)
    inertia[axis, axis] = 0.0
    return inertia


def default_rrr_model() -> RobotModel:
    """The 3-DOF articulated arm with slender-rod links.

    DH table (standard convention)::

        joint  a       alpha   d       theta
        1      0       +pi/2   0.210   q1
        2      0.300   0       0       q2
        3      0.250   0       0       q3

    The base and first segment are merged into d1, and the 50 mm tool
    segment is folded rigidly into a3.
    """
    seg = RRR_SEGMENT_LENGTHS
    d1 = seg["base"] + seg["link1"]
    a2 = seg["link2"]
    a3 = seg["link3"] + seg["link4"]
    m1, m2, m3 = (ROD_DENSITY * length for length in (d1, a2, a3))

    # Link 1 runs along the base z-axis, which is the link frame's y-axis
    # once the +pi/2 twist is applied; its COM sits below the frame origin.
    link1 = LinkParams(
        a=0.0, alpha=np.pi / 2, d=d1, mass=m1,
        com=[0.0, -d1 / 2, 0.0], inertia=rod_inertia(m1, d1, axis=1),
    )
    link2 = LinkParams(
        a=a2, alpha=0.0, d=0.0, mass=m2,
        com=[-a2 / 2, 0.0, 0.0], inertia=rod_inertia(m2, a2, axis=0),
    )
    link3 = LinkParams(
        a=a3, alpha=0.0, d=0.0, mass=m3,
        com=[-a3 / 2, 0.0, 0.0], inertia=rod_inertia(m3, a3, axis=0),
    )
    return RobotModel(
        links=(link1, link2, link3),
        gravity=np.array([0.0, 0.0, -STANDARD_GRAVITY]),
        name="default_rrr",
    )


def validate_model(model: RobotModel) -> list[str]:
    """Check every link against the physical invariants.

    Returns:
        One human-readable string per violation, naming the 1-based link
        index and the failed invariant. Empty when the model is valid.
    """
    violations = []
    if not np.all(np.isfinite(model.gravity)):
        violations.append("gravity: entries must be finite")
    for idx, link in enumerate(model.links, start=1):
        scalars = (link.a, link.alpha, link.d, link.theta_offset, link.mass)
        if not (np.all(np.isfinite(scalars)) and np.all(np.isfinite(link.com))
                and np.all(np.isfinite(link.inertia))):
            violations.append(f"link {idx}: parameters must be finite")
            continue
        if not link.mass > 0:
            violations.append(f"link {idx}: mass > 0 violated (mass = {link.mass:g})")
        inertia = link.inertia
        if np.max(np.abs(inertia - inertia.T)) > _SYM_TOL:
            violations.append(f"link {idx}: inertia must be symmetric")
            continue
        moments = np.linalg.eigvalsh(0.5 * (inertia + inertia.T))
        if moments[0] < -_SYM_TOL:
            violations.append(
                f"link {idx}: inertia must be positive semidefinite "
                f"(smallest principal moment {moments[0]:g})"
            )
            continue
        i1, i2, i3 = moments
        # Sorted ascending, so only the largest moment can break the bound.
        if i1 + i2 < i3 - _SYM_TOL:
            violations.append(
                f"link {idx}: principal moments violate the triangle inequality "
                f"({i1:g} + {i2:g} < {i3:g})"
            )
    return violations


def single_link_model(length: float = 0.5, mass: float = 1.0,
                      gravity_magnitude: float = STANDARD_GRAVITY) -> RobotModel:
    """A slender-rod pendulum swinging in the base x-y plane.

    Gravity points along -y so the joint axis (base z) is horizontal.
    """
    link = LinkParams(
        a=length, alpha=0.0, d=0.0, mass=mass,
        com=[-length / 2, 0.0, 0.0], inertia=rod_inertia(mass, length, axis=0),
    )
    return RobotModel(links=(link,), gravity=[0.0, -gravity_magnitude, 0.0], name="pendulum")
