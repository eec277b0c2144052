"""Self-verification suite run by ``ctcsim checks``.

Every check compares the library against an independent reference: a
closed-form solution, a finite-difference derivative, or an identity that
must hold between two separately computed quantities.
"""

from __future__ import annotations

import filecmp
import tempfile
import time
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .controller import ControllerGains, apply_model_mismatch
from .dynamics import (
    JointState,
    coriolis_matrix,
    coriolis_vector,
    forward_dynamics,
    gravity_vector,
    inverse_dynamics,
    mass_matrix,
)
from .io import default_scenario, write_log_csv
from .kinematics import (
    IkBranch,
    forward_kinematics,
    geometric_jacobian,
    inverse_kinematics,
    wrap_angle,
)
from .model import default_rrr_model, single_link_model
from .simulator import SimConfig, run_passive, run_simulation, step_rk4

SEED = 20240917


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def random_states(rng, count: int, n: int = 3):
    """Uniform q in (-pi, pi], qd in [-2, 2] rad/s, qdd in [-5, 5] rad/s^2."""
    q = rng.uniform(-np.pi, np.pi, size=(count, n))
    qd = rng.uniform(-2.0, 2.0, size=(count, n))
    qdd = rng.uniform(-5.0, 5.0, size=(count, n))
    return q, qd, qdd


def scenario_run(payload_mass: float = 0.0, initial_q=None, duration=None):
    """Run the default scenario, optionally with payload, start, or horizon overrides."""
    sc = default_scenario()
    q0 = sc.sim.initial_state.q if initial_q is None else np.asarray(initial_q, float)
    cfg = SimConfig(
        dt=sc.sim.dt,
        duration=sc.sim.duration if duration is None else duration,
        control_period=sc.sim.control_period,
        initial_state=JointState(q0, np.zeros(sc.model.n)),
    )
    plant = apply_model_mismatch(sc.model, payload_mass)
    return run_simulation(plant, sc.model, sc.trajectory, sc.gains, cfg)


def check_decomposition(rng) -> CheckResult:
    model = default_rrr_model()
    worst = 0.0
    for q, qd, qdd in zip(*random_states(rng, 1000)):
        lhs = inverse_dynamics(model, q, qd, qdd)
        rhs = mass_matrix(model, q) @ qdd + coriolis_vector(model, q, qd) + gravity_vector(model, q)
        worst = max(worst, np.max(np.abs(lhs - rhs)))
    return CheckResult("dynamics decomposition ID = M qdd + C + G", worst < 1e-9,
                       f"max residual {worst:.2e} (tol 1e-9, 1000 states)")


def check_roundtrip(rng) -> CheckResult:
    model = default_rrr_model()
    worst = 0.0
    for q, qd, qdd in zip(*random_states(rng, 1000)):
        tau = inverse_dynamics(model, q, qd, qdd)
        worst = max(worst, np.max(np.abs(forward_dynamics(model, JointState(q, qd), tau) - qdd)))
    return CheckResult("ID/FD round trip", worst < 1e-8,
                       f"max |FD(ID(qdd)) - qdd| {worst:.2e} (tol 1e-8, 1000 states)")


def check_mass_matrix(rng) -> CheckResult:
    model = default_rrr_model()
    asym, min_eig = 0.0, np.inf
    for q in rng.uniform(-np.pi, np.pi, size=(1000, 3)):
        m = mass_matrix(model, q, symmetrize=False)
        asym = max(asym, np.max(np.abs(m - m.T)))
        min_eig = min(min_eig, np.linalg.eigvalsh(0.5 * (m + m.T))[0])

    skew = 0.0
    h = 1e-6
    for _ in range(100):
        q = rng.uniform(-np.pi, np.pi, 3)
        qd = rng.uniform(-2.0, 2.0, 3)
        x = rng.standard_normal(3)
        mdot = (mass_matrix(model, q + h * qd) - mass_matrix(model, q - h * qd)) / (2 * h)
        skew = max(skew, abs(x @ (mdot - 2 * coriolis_matrix(model, q, qd)) @ x))
    ok = asym < 1e-10 and min_eig > 0 and skew < 1e-6
    return CheckResult("mass matrix SPD and Mdot - 2C skew", ok,
                       f"asymmetry {asym:.2e}, min eigenvalue {min_eig:.3e}, skew residual {skew:.2e}")


def check_energy(rng) -> CheckResult:
    model = default_rrr_model().with_gravity([0.0, 0.0, 0.0])
    state = JointState(rng.uniform(-np.pi, np.pi, 3), rng.uniform(-1.0, 1.0, 3))
    log = run_passive(model, SimConfig(dt=1e-3, duration=5.0, initial_state=state))
    drift = np.max(np.abs(log.energy - log.energy[0])) / log.energy[0]

    run = scenario_run()
    power = np.sum(run.qd * run.tau, axis=1)
    work = cumulative_trapezoid(power, run.t, initial=0.0)
    balance = np.max(np.abs(run.energy - run.energy[0] - work))
    return CheckResult("energy conservation and power balance", drift < 1e-6 and balance < 1e-4,
                       f"relative drift {drift:.2e} (tol 1e-6), power-balance error {balance:.2e} J (tol 1e-4)")


def pendulum_period(model, amplitude: float = 0.01, dt: float = 1e-3, periods: int = 3) -> float:
    """Mean period of free small oscillations about the hanging rest angle."""
    rest = -np.pi / 2
    state = JointState(np.array([rest + amplitude]), np.zeros(1))
    tau = np.zeros(1)
    crossings = []
    t, prev = 0.0, amplitude
    while len(crossings) < periods + 1:
        state = step_rk4(model, state, tau, dt)
        t += dt
        cur = state.q[0] - rest
        if prev < 0 <= cur:
            crossings.append(t - dt * cur / (cur - prev))
        prev = cur
    return float(np.mean(np.diff(crossings)))


def check_pendulum(rng) -> CheckResult:
    length, mass = 0.5, 1.0
    model = single_link_model(length, mass)
    g = -model.gravity[1]
    lc = length / 2
    i_eff = mass * length**2 / 12 + mass * lc**2
    expected = 2 * np.pi * np.sqrt(i_eff / (mass * g * lc))
    measured = pendulum_period(model)
    rel = abs(measured - expected) / expected
    return CheckResult("pendulum small-angle period", rel < 1e-3,
                       f"period {measured:.6f} s vs {expected:.6f} s (rel err {rel:.2e}, tol 1e-3)")


def check_ctc(rng) -> CheckResult:
    on_track = scenario_run().max_abs_error()
    e0 = 0.1
    run = scenario_run(initial_q=-e0 * np.ones(3), duration=1.0)
    decay = e0 * (1 + 10 * run.t) * np.exp(-10 * run.t)
    dev = np.max(np.abs(run.e - decay[:, None]))
    return CheckResult("computed-torque exactness", on_track < 1e-6 and dev < 1e-4,
                       f"on-trajectory max error {on_track:.2e} rad (tol 1e-6), "
                       f"decay deviation {dev:.2e} rad (tol 1e-4)")


def check_mismatch(rng) -> CheckResult:
    matched = scenario_run().max_abs_error()
    loaded = scenario_run(payload_mass=1.0).max_abs_error()
    return CheckResult("payload mismatch degrades tracking", loaded > matched,
                       f"peak error {loaded:.3e} rad with 1 kg vs {matched:.3e} rad matched")


def sample_ik_configurations(rng, count: int, model):
    """Random q away from the shoulder axis and the straight/folded elbow."""
    a2, a3 = model.links[1].a, model.links[2].a
    out = []
    while len(out) < count:
        q = np.array([rng.uniform(-np.pi, np.pi), *rng.uniform(-np.pi + 0.1, np.pi - 0.1, 2)])
        radial = a2 * np.cos(q[1]) + a3 * np.cos(q[1] + q[2])
        if radial > 1e-2 and abs(q[2]) > 1e-2:
            out.append(q)
    return np.array(out)


def check_kinematics(rng) -> CheckResult:
    model = default_rrr_model()
    fk0 = forward_kinematics(model, np.zeros(3)).position
    fk_err = np.max(np.abs(fk0 - [0.550, 0.0, 0.210]))

    ik_err = 0.0
    for q in sample_ik_configurations(rng, 1000, model):
        branch = IkBranch.UP if q[2] <= 0 else IkBranch.DOWN
        sol = inverse_kinematics(model, forward_kinematics(model, q).position, branch)
        ik_err = max(ik_err, np.max(np.abs(wrap_angle(sol.q - q))))

    jac_err = 0.0
    h = 1e-6
    for q in rng.uniform(-np.pi, np.pi, size=(100, 3)):
        jac = geometric_jacobian(model, q)
        for j in range(3):
            step = np.zeros(3)
            step[j] = h
            fd = (forward_kinematics(model, q + step).position
                  - forward_kinematics(model, q - step).position) / (2 * h)
            jac_err = max(jac_err, np.max(np.abs(fd - jac[:3, j])))
    ok = fk_err < 1e-12 and ik_err < 1e-9 and jac_err < 1e-6
    return CheckResult("kinematics FK / IK / Jacobian", ok,
                       f"FK(0) error {fk_err:.1e} m, IK round trip {ik_err:.2e} rad, "
                       f"Jacobian vs FD {jac_err:.2e}")


def rk4_order_ratio(dt: float = 0.01, horizon: float = 1.0) -> float:
    """err(dt) / err(dt/2) against a dt/16 reference.

    The arm starts moving with the initial gravity torque held, which keeps
    it away from the near-singular upright pose where the slender-rod
    waist inertia vanishes.
    """
    model = default_rrr_model()
    start = JointState(np.array([0.3, 0.2, 0.8]), np.array([1.0, -0.5, 0.5]))
    tau = gravity_vector(model, start.q)

    def endpoint(step):
        state = start
        for _ in range(int(round(horizon / step))):
            state = step_rk4(model, state, tau, step)
        return np.concatenate(state)

    ref = endpoint(dt / 16)
    coarse = np.max(np.abs(endpoint(dt) - ref))
    fine = np.max(np.abs(endpoint(dt / 2) - ref))
    return coarse / fine


def check_rk4_order(rng) -> CheckResult:
    ratio = rk4_order_ratio()
    return CheckResult("RK4 convergence order", 12 <= ratio <= 20,
                       f"error ratio under dt halving {ratio:.2f} (expected [12, 20])")


def check_pipeline(rng) -> CheckResult:
    with tempfile.TemporaryDirectory() as tmp:
        paths = [Path(tmp) / f"run{i}.csv" for i in range(2)]
        for path in paths:
            write_log_csv(scenario_run(), path)
        identical = filecmp.cmp(paths[0], paths[1], shallow=False)
        lines = paths[0].read_text().splitlines()
    rows = len(lines) - 1
    cols = len(lines[0].split(","))
    ok = identical and rows == 3001 and cols == 26
    return CheckResult("simulate output format and determinism", ok,
                       f"{rows} rows, {cols} columns, byte-identical={identical}")


CHECKS: list[Callable[[np.random.Generator], CheckResult]] = [
    check_decomposition,
    check_roundtrip,
    check_mass_matrix,
    check_energy,
    check_pendulum,
    check_ctc,
    check_mismatch,
    check_kinematics,
    check_rk4_order,
    check_pipeline,
]


def run_checks(echo=print) -> bool:
    """Run every check, echo one PASS/FAIL line each, return overall success."""
    rng = np.random.default_rng(SEED)
    all_ok = True
    for check in CHECKS:
        start = time.perf_counter()
        try:
            result = check(rng)
        except Exception as exc:  # a crashing check is a failed check
            result = CheckResult(check.__name__, False, f"raised {type(exc).__name__}: {exc}")
        elapsed = time.perf_counter() - start
        passed = bool(result.passed)
        all_ok &= passed
        status = "PASS" if passed else "FAIL"
        echo(f"[{status}] {result.name}: {result.detail} ({elapsed:.1f} s)")
    return all_ok
