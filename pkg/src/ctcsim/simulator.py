"""Fixed-step closed-loop simulation of a computed-torque controlled arm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .controller import ControllerGains, computed_torque
from .dynamics import JointState, forward_dynamics, total_energy
from .errors import DimensionError, ModelError, SimulationError
from .model import RobotModel
from .trajectory import Trajectory, plan_quintic, sample

# Relative slack when checking that duration and control period are
# whole multiples of dt.
_GRID_TOL = 1e-9

TorqueLaw = Callable[[float, JointState], np.ndarray]


@dataclass(frozen=True, eq=False)
class SimConfig:
    """Integrator settings.

    ``control_period`` defaults to ``dt``. At that setting the control law is
    evaluated at every Runge-Kutta stage, i.e. the controller is treated as
    continuous. Longer periods hold the torque between control instants.
    """

    dt: float = 1e-3
    duration: float = 3.0
    initial_state: JointState | None = None
    control_period: float | None = None

    def __post_init__(self):
        dt, duration = float(self.dt), float(self.duration)
        if not (math.isfinite(dt) and dt > 0):
            raise ValueError(f"sim.dt must be positive, got {dt}")
        if not (math.isfinite(duration) and duration >= dt * (1 - _GRID_TOL)):
            raise ValueError(f"sim.duration must be at least dt, got {duration}")
        period = dt if self.control_period is None else float(self.control_period)
        ratio = period / dt
        if not (ratio >= 1 - _GRID_TOL and abs(ratio - round(ratio)) <= _GRID_TOL * ratio):
            raise ValueError(
                f"sim.control_period must be a whole multiple of dt ({dt}), got {period}"
            )
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "duration", duration)
        object.__setattr__(self, "control_period", period)
        if self.initial_state is not None:
            q = np.array(self.initial_state.q, dtype=float)
            qd = np.array(self.initial_state.qd, dtype=float)
            if q.shape != qd.shape or q.ndim != 1:
                raise DimensionError("sim.initial_q and sim.initial_qd must be equal-length vectors")
            object.__setattr__(self, "initial_state", JointState(q, qd))

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.duration / self.dt + _GRID_TOL))

    @property
    def hold_steps(self) -> int:
        return int(round(self.control_period / self.dt))

    def __eq__(self, other):
        if not isinstance(other, SimConfig):
            return NotImplemented
        same_state = (self.initial_state is None) == (other.initial_state is None)
        if same_state and self.initial_state is not None:
            same_state = (np.array_equal(self.initial_state.q, other.initial_state.q)
                          and np.array_equal(self.initial_state.qd, other.initial_state.qd))
        return (same_state and self.dt == other.dt and self.duration == other.duration
                and self.control_period == other.control_period)

    __hash__ = None


@dataclass(eq=False)
class SimLog:
    """Time series sampled every dt. Per-joint arrays have shape (rows, n)."""

    t: np.ndarray
    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray
    tau: np.ndarray
    q_d: np.ndarray
    qd_d: np.ndarray
    qdd_d: np.ndarray
    e: np.ndarray
    energy: np.ndarray
    dt: float = field(default=0.0)

    @property
    def n(self) -> int:
        return self.q.shape[1]

    def __len__(self):
        return len(self.t)

    def max_abs_error(self) -> float:
        return float(np.max(np.abs(self.e)))


def _finite(*arrays) -> bool:
    return all(np.all(np.isfinite(a)) for a in arrays)


def _rk4(model: RobotModel, q, qd, dt: float, torque_at, k1_acc=None):
    """One classical RK4 step of (q, qd)' = (qd, FD(q, qd, tau)).

    ``torque_at(offset, state)`` supplies the torque at each stage, with
    ``offset`` the time since the start of the step.
    """
    def acc(offset, qq, vv):
        state = JointState(qq, vv)
        return forward_dynamics(model, state, torque_at(offset, state))

    half = 0.5 * dt
    a1 = acc(0.0, q, qd) if k1_acc is None else k1_acc
    q2, v2 = q + half * qd, qd + half * a1
    a2 = acc(half, q2, v2)
    q3, v3 = q + half * v2, qd + half * a2
    a3 = acc(half, q3, v3)
    q4, v4 = q + dt * v3, qd + dt * a3
    a4 = acc(dt, q4, v4)
    q_next = q + dt / 6.0 * (qd + 2 * v2 + 2 * v3 + v4)
    qd_next = qd + dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
    return q_next, qd_next


def step_rk4(model: RobotModel, state: JointState, tau, dt: float) -> JointState:
    """Advance ``state`` by ``dt`` with ``tau`` held constant over the step."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    tau = np.asarray(tau, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        q, qd = _rk4(model, np.asarray(state.q, float), np.asarray(state.qd, float), dt,
                     lambda offset, s: tau)
    if not _finite(q, qd):
        raise SimulationError("integration produced a non-finite state", t=math.nan)
    return JointState(q, qd)


def _simulate(plant: RobotModel, law: TorqueLaw, traj: Trajectory, cfg: SimConfig) -> SimLog:
    n = plant.n
    if traj.n != n:
        raise DimensionError(f"trajectory has {traj.n} joints, plant has {n}")
    if cfg.initial_state is None:
        q, qd = np.array(traj.start_q, dtype=float), np.zeros(n)
    else:
        q, qd = cfg.initial_state.q.copy(), cfg.initial_state.qd.copy()
    if q.shape != (n,):
        raise DimensionError(f"initial state has {q.size} joints, plant has {n}")

    rows = cfg.n_steps + 1
    dt = cfg.dt
    hold = cfg.hold_steps
    continuous = hold == 1
    log = {key: np.empty((rows, n)) for key in ("q", "qd", "qdd", "tau", "q_d", "qd_d", "qdd_d")}
    energy = np.empty(rows)
    # Multiplying the step index keeps the time grid free of accumulated rounding.
    t_grid = np.arange(rows) * dt

    tau_held = None
    for k in range(rows):
        t = k * dt
        state = JointState(q, qd)
        if continuous or k % hold == 0:
            tau_held = law(t, state)
        tau = tau_held
        qdd = forward_dynamics(plant, state, tau)
        ref = sample(traj, t)
        log["q"][k], log["qd"][k], log["qdd"][k], log["tau"][k] = q, qd, qdd, tau
        log["q_d"][k], log["qd_d"][k], log["qdd_d"][k] = ref.q_d, ref.qd_d, ref.qdd_d
        with np.errstate(over="ignore", invalid="ignore"):
            energy[k] = total_energy(plant, state)
        if k == rows - 1:
            break

        if continuous:
            def torque_at(offset, s, _t=t):
                return law(_t + offset, s)
        else:
            def torque_at(offset, s, _tau=tau):
                return _tau
        blown = f"state became non-finite between t={t:.6g} s and t={t + dt:.6g} s"
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                q, qd = _rk4(plant, q, qd, dt, torque_at, k1_acc=qdd)
        except (ValueError, ModelError) as exc:
            # Stage states that overflowed trip the finiteness guards downstream.
            raise SimulationError(f"{blown} ({exc})", t=t + dt) from exc
        if not _finite(q, qd):
            raise SimulationError(blown, t=t + dt)

    return SimLog(
        t=t_grid, e=log["q_d"] - log["q"], energy=energy, dt=dt,
        **log,
    )


def run_simulation(plant: RobotModel, controller_model: RobotModel, traj: Trajectory,
                   gains: ControllerGains, cfg: SimConfig) -> SimLog:
    """Closed-loop run: ``plant`` is integrated, ``controller_model`` is what
    the computed-torque law believes the arm to be.

    The initial state defaults to rest at the trajectory start.
    """
    if controller_model.n != plant.n:
        raise DimensionError(
            f"controller model has {controller_model.n} joints, plant has {plant.n}"
        )

    def law(t, state):
        return computed_torque(controller_model, state, sample(traj, t), gains)

    return _simulate(plant, law, traj, cfg)


def run_passive(plant: RobotModel, cfg: SimConfig) -> SimLog:
    """Unactuated run (zero torque) from ``cfg.initial_state``.

    The logged reference holds the initial configuration, so the error
    columns show the drift away from it.
    """
    if cfg.initial_state is None:
        raise ValueError("run_passive needs an explicit initial state")
    hold = plan_quintic(cfg.initial_state.q, cfg.initial_state.q, cfg.duration)
    zeros = np.zeros(plant.n)
    return _simulate(plant, lambda t, state: zeros, hold, cfg)
