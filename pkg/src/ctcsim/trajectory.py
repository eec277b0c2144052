"""Joint-space quintic reference trajectories."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class TrajectorySample(NamedTuple):
    t: float
    q_d: np.ndarray
    qd_d: np.ndarray
    qdd_d: np.ndarray


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Single-segment quintic per joint, rest-to-rest.

    ``coeffs[j]`` holds the polynomial coefficients of joint j in
    ascending powers of t, so q_j(t) = sum_k coeffs[j, k] * t**k.
    """

    start_q: np.ndarray
    end_q: np.ndarray
    T: float
    coeffs: np.ndarray
    kind: str = "quintic"

    @property
    def n(self) -> int:
        return len(self.start_q)

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.T == other.T
            and np.array_equal(self.start_q, other.start_q)
            and np.array_equal(self.end_q, other.end_q)
            and np.array_equal(self.coeffs, other.coeffs)
        )

    __hash__ = None


def plan_quintic(start_q, end_q, T: float) -> Trajectory:
    """Plan q(t) = start + (end - start) * (10 s^3 - 15 s^4 + 6 s^5), s = t / T."""
    start_q = np.array(start_q, dtype=float).reshape(-1)
    end_q = np.array(end_q, dtype=float).reshape(-1)
    if start_q.shape != end_q.shape:
        raise ValueError(
            f"start_q and end_q lengths differ ({start_q.size} vs {end_q.size})"
        )
    T = float(T)
    if not (np.isfinite(T) and T > 0):
        raise ValueError(f"trajectory duration must be positive, got {T}")
    delta = end_q - start_q
    coeffs = np.zeros((start_q.size, 6))
    coeffs[:, 0] = start_q
    coeffs[:, 3] = 10.0 * delta / T**3
    coeffs[:, 4] = -15.0 * delta / T**4
    coeffs[:, 5] = 6.0 * delta / T**5
    for arr in (start_q, end_q, coeffs):
        arr.setflags(write=False)
    return Trajectory(start_q=start_q, end_q=end_q, T=T, coeffs=coeffs)


def sample(traj: Trajectory, t: float) -> TrajectorySample:
    """Evaluate the reference at time ``t``.

    Times before 0 or after T are clamped to the end points, where the
    reference is at rest.
    """
    t = float(t)
    n = traj.n
    if t <= 0.0:
        return TrajectorySample(t, traj.start_q.copy(), np.zeros(n), np.zeros(n))
    if t >= traj.T:
        return TrajectorySample(t, traj.end_q.copy(), np.zeros(n), np.zeros(n))
    powers = t ** np.arange(6, dtype=float)
    vel_basis = np.array([0.0, 1.0, 2 * t, 3 * powers[2], 4 * powers[3], 5 * powers[4]])
    acc_basis = np.array([0.0, 0.0, 2.0, 6 * t, 12 * powers[2], 20 * powers[3]])
    c = traj.coeffs
    return TrajectorySample(t, c @ powers, c @ vel_basis, c @ acc_basis)


def sample_many(traj: Trajectory, times) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stacked (q_d, qd_d, qdd_d), each of shape (len(times), n)."""
    rows = [sample(traj, t) for t in times]
    return (
        np.array([r.q_d for r in rows]),
        np.array([r.qd_d for r in rows]),
        np.array([r.qdd_d for r in rows]),
    )
