"""Rigid-body dynamics of serial revolute chains.

The joint-space equation of motion is

    tau = M(q) qdd + c(q, qd) + g(q)

Everything here is derived from one recursive Newton-Euler pass,
``_rne``, which accepts several (qd, qdd, base acceleration) columns at a
time so that the mass matrix and the bias forces come out of a single sweep.
Gravity enters as a fictitious upward acceleration of the base.
"""

from __future__ import annotations

from typing import NamedTuple

import numba
import numpy as np
import scipy.linalg

from .errors import DimensionError, ModelError
from .kinematics import check_joint_vector, com_positions
from .model import RobotModel

# Central-difference step for derivatives of M(q).
FD_STEP = 1e-6


class JointState(NamedTuple):
    """Joint positions (rad) and velocities (rad/s)."""

    q: np.ndarray
    qd: np.ndarray


class _Chain(NamedTuple):
    ca: np.ndarray        # (n,) cos(alpha)
    sa: np.ndarray        # (n,) sin(alpha)
    offset: np.ndarray    # (n,) theta offsets
    pstar: np.ndarray     # (n, 3) origin i-1 -> origin i, in frame i
    com: np.ndarray       # (n, 3)
    mass: np.ndarray      # (n,)
    inertia: np.ndarray   # (n, 3, 3)


def _chain(model: RobotModel) -> _Chain:
    cached = model.__dict__.get("_rne_chain")
    if cached is not None:
        return cached
    links = model.links
    alpha = np.array([link.alpha for link in links])
    d = np.array([link.d for link in links])
    ca, sa = np.cos(alpha), np.sin(alpha)
    chain = _Chain(
        ca=ca,
        sa=sa,
        offset=np.array([link.theta_offset for link in links]),
        pstar=np.column_stack([[link.a for link in links], d * sa, d * ca]),
        com=np.array([link.com for link in links]),
        mass=np.array([link.mass for link in links]),
        inertia=np.array([link.inertia for link in links]),
    )
    # RobotModel is immutable, so the derived constants never go stale.
    model.__dict__["_rne_chain"] = chain
    return chain


@numba.njit(cache=True, inline="always")
def _cross(a, b):
    out = np.empty(3)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


@numba.njit(cache=True, inline="always")
def _matvec(m, v):
    out = np.empty(3)
    for r in range(3):
        out[r] = m[r, 0] * v[0] + m[r, 1] * v[1] + m[r, 2] * v[2]
    return out


@numba.njit(cache=True, inline="always")
def _tmatvec(m, v):
    out = np.empty(3)
    for r in range(3):
        out[r] = m[0, r] * v[0] + m[1, r] * v[1] + m[2, r] * v[2]
    return out


@numba.njit(cache=True)
def _rne_kernel(q, qd, qdd, base_acc, ca, sa, offset, pstar, com, mass, inertia):
    n, k = qd.shape
    rot = np.empty((n, 3, 3))
    for i in range(n):
        ct = np.cos(q[i] + offset[i])
        st = np.sin(q[i] + offset[i])
        rot[i, 0, 0] = ct
        rot[i, 0, 1] = -st * ca[i]
        rot[i, 0, 2] = st * sa[i]
        rot[i, 1, 0] = st
        rot[i, 1, 1] = ct * ca[i]
        rot[i, 1, 2] = -ct * sa[i]
        rot[i, 2, 0] = 0.0
        rot[i, 2, 1] = sa[i]
        rot[i, 2, 2] = ca[i]

    tau = np.empty((n, k))
    forces = np.empty((n, 3))
    moments = np.empty((n, 3))
    axis = np.zeros(3)
    for col in range(k):
        w = np.zeros(3)
        wd = np.zeros(3)
        vd = base_acc[:, col].copy()
        for i in range(n):
            axis[1] = sa[i]
            axis[2] = ca[i]
            spin = axis * qd[i, col]
            w_in = _tmatvec(rot[i], w)
            w = w_in + spin
            wd = _tmatvec(rot[i], wd) + axis * qdd[i, col] + _cross(w_in, spin)
            p = pstar[i]
            vd = _tmatvec(rot[i], vd) + _cross(wd, p) + _cross(w, _cross(w, p))
            r = com[i]
            acc_com = vd + _cross(wd, r) + _cross(w, _cross(w, r))
            forces[i] = mass[i] * acc_com
            moments[i] = _matvec(inertia[i], wd) + _cross(w, _matvec(inertia[i], w))

        f = np.zeros(3)
        nm = np.zeros(3)
        for i in range(n - 1, -1, -1):
            if i < n - 1:
                f = _matvec(rot[i + 1], f)
                nm = _matvec(rot[i + 1], nm)
            p = pstar[i]
            nm = moments[i] + nm + _cross(p + com[i], forces[i]) + _cross(p, f)
            f = f + forces[i]
            tau[i, col] = sa[i] * nm[1] + ca[i] * nm[2]
    return tau


def _rne(model: RobotModel, q, qd, qdd, base_acc) -> np.ndarray:
    """Batched recursive Newton-Euler.

    Args:
        q: (n,) joint angles shared by every column.
        qd, qdd: (n, k) joint velocities and accelerations, one column per case.
        base_acc: (3, k) linear acceleration imposed on the base frame.

    Returns:
        (n, k) joint torques.
    """
    c = _chain(model)
    return _rne_kernel(
        np.ascontiguousarray(q, dtype=np.float64),
        np.ascontiguousarray(qd, dtype=np.float64),
        np.ascontiguousarray(qdd, dtype=np.float64),
        np.ascontiguousarray(base_acc, dtype=np.float64),
        c.ca, c.sa, c.offset, c.pstar, c.com, c.mass, c.inertia,
    )


def _base_acc(model: RobotModel, gravity) -> np.ndarray:
    g = model.gravity if gravity is None else np.asarray(gravity, dtype=float)
    if g.shape != (3,):
        raise DimensionError(f"gravity must be a 3-vector, got shape {g.shape}")
    return -g.reshape(3, 1)


def inverse_dynamics(model: RobotModel, q, qd, qdd, gravity_override=None) -> np.ndarray:
    """Joint torques producing ``qdd`` at state (q, qd).

    ``gravity_override`` replaces the model's gravity vector for this call
    only; pass zeros to drop the gravity load.
    """
    q = check_joint_vector(model, q, "q")
    qd = check_joint_vector(model, qd, "qd")
    qdd = check_joint_vector(model, qdd, "qdd")
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qd)) and np.all(np.isfinite(qdd))):
        raise ValueError("inverse_dynamics inputs must be finite")
    base = _base_acc(model, gravity_override)
    return _rne(model, q, qd[:, None], qdd[:, None], base)[:, 0]


def mass_matrix(model: RobotModel, q, symmetrize: bool = True) -> np.ndarray:
    """Joint-space inertia matrix, one RNE column probe per joint."""
    q = check_joint_vector(model, q)
    n = model.n
    m = _rne(model, q, np.zeros((n, n)), np.eye(n), np.zeros((3, n)))
    if symmetrize:
        m = 0.5 * (m + m.T)
    return m


def gravity_vector(model: RobotModel, q, gravity_override=None) -> np.ndarray:
    n = model.n
    return inverse_dynamics(model, q, np.zeros(n), np.zeros(n), gravity_override)


def coriolis_vector(model: RobotModel, q, qd) -> np.ndarray:
    """Velocity-product torques c(q, qd), quadratic in qd."""
    return inverse_dynamics(model, q, qd, np.zeros(model.n), np.zeros(3))


def mass_matrix_derivatives(model: RobotModel, q, h: float = FD_STEP) -> np.ndarray:
    """Central differences dM/dq_i, stacked as an (n, n, n) array indexed [i, row, col]."""
    q = check_joint_vector(model, q)
    out = np.empty((model.n, model.n, model.n))
    for i in range(model.n):
        step = np.zeros(model.n)
        step[i] = h
        out[i] = (mass_matrix(model, q + step) - mass_matrix(model, q - step)) / (2 * h)
    return out


def coriolis_matrix(model: RobotModel, q, qd) -> np.ndarray:
    """Coriolis matrix from Christoffel symbols of the first kind.

    C[k, j] = sum_i 1/2 (dM[k,j]/dq_i + dM[k,i]/dq_j - dM[i,j]/dq_k) qd_i,
    which makes dM/dt - 2C skew-symmetric.
    """
    qd = check_joint_vector(model, qd, "qd")
    dm = mass_matrix_derivatives(model, q)
    return 0.5 * (
        np.einsum("i,ikj->kj", qd, dm)
        + np.einsum("i,jki->kj", qd, dm)
        - np.einsum("i,kij->kj", qd, dm)
    )


def mass_and_bias(model: RobotModel, q, qd, gravity_override=None):
    """M(q) and c(q, qd) + g(q) from a single batched sweep."""
    n = model.n
    cols_qd = np.zeros((n, n + 1))
    cols_qd[:, n] = qd
    cols_qdd = np.zeros((n, n + 1))
    cols_qdd[:, :n] = np.eye(n)
    base = np.zeros((3, n + 1))
    base[:, n:] = _base_acc(model, gravity_override)
    out = _rne(model, q, cols_qd, cols_qdd, base)
    m = out[:, :n]
    return 0.5 * (m + m.T), out[:, n]


def solve_mass(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        factor = scipy.linalg.cho_factor(m, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise ModelError("mass matrix is not positive definite") from exc
    return scipy.linalg.cho_solve(factor, rhs, check_finite=False)


def forward_dynamics(model: RobotModel, state: JointState, tau, gravity_override=None) -> np.ndarray:
    """Joint accelerations under applied torque ``tau``.

    Solves M(q) qdd = tau - c(q, qd) - g(q) by Cholesky factorization.
    """
    q = check_joint_vector(model, state.q, "q")
    qd = check_joint_vector(model, state.qd, "qd")
    tau = check_joint_vector(model, tau, "tau")
    m, bias = mass_and_bias(model, q, qd, gravity_override)
    return solve_mass(m, tau - bias)


def kinetic_energy(model: RobotModel, state: JointState) -> float:
    qd = np.asarray(state.qd, dtype=float)
    return 0.5 * float(qd @ mass_matrix(model, state.q) @ qd)


def potential_energy(model: RobotModel, q) -> float:
    masses = np.array([link.mass for link in model.links])
    heights = com_positions(model, q) @ model.gravity
    return -float(masses @ heights)


def total_energy(model: RobotModel, state: JointState) -> float:
    """Kinetic plus gravitational energy, potential referenced to the base origin."""
    return kinetic_energy(model, state) + potential_energy(model, state.q)
