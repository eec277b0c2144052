import json

import numpy as np
import pytest

from ctcsim.controller import ControllerGains
from ctcsim.dynamics import JointState
from ctcsim.errors import ScenarioError
from ctcsim.io import (
    ScenarioConfig,
    default_scenario,
    load_scenario,
    log_header,
    read_log_csv,
    scenario_from_dict,
    write_log_csv,
    write_scenario,
)
from ctcsim.model import default_rrr_model, rod_inertia
from ctcsim.simulator import SimConfig, SimLog
from ctcsim.trajectory import plan_quintic

MINIMAL = {
    "model": "default_rrr",
    "trajectory": {"start_q": [0, 0, 0], "end_q": [1, 0.5, -0.5], "T": 2.0},
}


def _write(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return path


def _mm_link(a, d, alpha, mass, length, com, axis):
    return {
        "a": a, "alpha": alpha, "d": d, "mass": mass, "com": com,
        "inertia": (rod_inertia(mass, length, axis) * 1e6).tolist(),
    }


def test_minimal_config_gets_defaults(tmp_path):
    cfg = load_scenario(_write(tmp_path, MINIMAL))
    assert cfg.model == default_rrr_model()
    assert cfg.gains == ControllerGains.uniform(3, 100.0, 20.0)
    assert cfg.sim.dt == 1e-3 and cfg.sim.duration == 3.0 and cfg.sim.control_period == 1e-3
    np.testing.assert_array_equal(cfg.sim.initial_state.q, [0, 0, 0])
    np.testing.assert_array_equal(cfg.sim.initial_state.qd, [0, 0, 0])
    assert cfg.payload_mass == 0.0
    assert cfg.trajectory.T == 2.0


def test_millimetre_units_are_converted(tmp_path):
    links = [
        _mm_link(0, 210, np.pi / 2, 1.05, 0.21, [0, -105, 0], 1),
        _mm_link(300, 0, 0, 1.5, 0.3, [-150, 0, 0], 0),
        _mm_link(250, 0, 0, 1.25, 0.25, [-125, 0, 0], 0),
    ]
    data = dict(MINIMAL, units="mm",
                model={"name": "mm_arm", "gravity": [0, 0, -9810], "links": links})
    model = load_scenario(_write(tmp_path, data)).model
    assert model.links[1].a == pytest.approx(0.300, abs=1e-15)
    ref = default_rrr_model()
    for got, want in zip(model.links, ref.links):
        assert got.a == pytest.approx(want.a, abs=1e-15)
        assert got.d == pytest.approx(want.d, abs=1e-15)
        np.testing.assert_allclose(got.com, want.com, atol=1e-15)
        np.testing.assert_allclose(got.inertia, want.inertia, atol=1e-15)
    np.testing.assert_allclose(model.gravity, ref.gravity, atol=1e-12)


def test_negative_gain_names_the_field(tmp_path):
    data = dict(MINIMAL, gains={"kp": [100, -5, 100], "kv": [20, 20, 20]})
    with pytest.raises(ScenarioError) as info:
        load_scenario(_write(tmp_path, data))
    assert info.value.field.startswith("gains.kp")
    assert "gains.kp" in str(info.value)


@pytest.mark.parametrize("data, field", [
    (dict(MINIMAL, colour="red"), "<root>"),
    (dict(MINIMAL, sim={"dt": 1e-3, "stepper": "euler"}), "sim"),
    (dict(MINIMAL, trajectory=dict(MINIMAL["trajectory"], shape="cubic")), "trajectory"),
])
def test_unknown_fields_are_rejected(data, field):
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(data)
    assert info.value.field == field


@pytest.mark.parametrize("patch, field", [
    ({"trajectory": {"start_q": [0, 0], "end_q": [1, 1, 1], "T": 1}}, "trajectory.start_q"),
    ({"trajectory": {"start_q": [0, 0, 0], "end_q": [1, 1, 1], "T": 0}}, "trajectory.T"),
    ({"payload_mass": -1.0}, "payload_mass"),
    ({"model": "puma560"}, "model"),
    ({"sim": {"dt": 1e-3, "control_period": 1.5e-3}}, "sim"),
    ({"schema_version": 2}, "schema_version"),
])
def test_invalid_values_name_the_field(patch, field):
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(dict(MINIMAL, **patch))
    assert info.value.field == field


def test_physically_invalid_model_is_rejected():
    link = {"a": 0.3, "alpha": 0, "d": 0, "mass": 0.0, "com": [0, 0, 0],
            "inertia": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}
    data = dict(MINIMAL, model={"links": [link] * 3})
    with pytest.raises(ScenarioError, match="link 1: mass > 0 violated"):
        scenario_from_dict(data)


def test_json_syntax_error_reports_position(tmp_path):
    path = _write(tmp_path, '{\n  "model": "default_rrr",\n  "trajectory": {,}\n}')
    with pytest.raises(ScenarioError, match="line 3, column"):
        load_scenario(path)


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_scenario(tmp_path / "nope.json")


def _custom_config():
    model = default_rrr_model()
    links = list(model.links)
    links[2] = type(links[2])(a=0.27, alpha=0.1, d=0.02, theta_offset=0.05, mass=2.0,
                              com=[-0.1, 0.01, 0.0], inertia=np.diag([0.001, 0.02, 0.02]))
    custom = type(model)(links=tuple(links), gravity=[0.0, 0.0, -9.8], name="custom")
    return ScenarioConfig(
        model=custom,
        trajectory=plan_quintic([0.1, 0.2, 0.3], [-0.4, 0.5, 1.0 / 3.0], 1.7),
        gains=ControllerGains(kp=np.array([90.0, 110.0, 121.0]), kv=np.array([19.0, 21.0, 22.0])),
        sim=SimConfig(dt=2e-3, duration=1.5, control_period=4e-3,
                      initial_state=JointState(np.array([0.1, 0.25, 0.3]), np.array([0.0, 0.1, -0.2]))),
        payload_mass=0.75,
    )


@pytest.mark.parametrize("config", [default_scenario(), _custom_config()], ids=["default", "custom"])
def test_scenario_round_trip(tmp_path, config):
    path = tmp_path / "round.json"
    write_scenario(config, path)
    assert load_scenario(path) == config


def test_shipped_default_scenario_matches(tmp_path):
    from pathlib import Path

    shipped = Path(__file__).resolve().parents[1] / "scenarios" / "default.json"
    assert load_scenario(shipped) == default_scenario()


def test_log_header_names():
    expected = (
        ["t", "q1", "q2", "q3", "qd1", "qd2", "qd3", "qdd1", "qdd2", "qdd3",
         "tau1", "tau2", "tau3", "qd_ref1", "qd_ref2", "qd_ref3",
         "qdref_d1", "qdref_d2", "qdref_d3", "qddref_d1", "qddref_d2", "qddref_d3",
         "e1", "e2", "e3", "energy"]
    )
    assert log_header(3) == expected
    assert len(log_header(3)) == 26
    assert len(log_header(6)) == 2 + 8 * 6


def _one_row_log(rng):
    row = {name: rng.standard_normal((1, 3)) for name in
           ("q", "qd", "qdd", "tau", "q_d", "qd_d", "qdd_d", "e")}
    return SimLog(t=np.zeros(1), energy=rng.standard_normal(1), dt=1e-3, **row)


def test_single_row_log_csv(tmp_path, rng):
    path = tmp_path / "one.csv"
    log = _one_row_log(rng)
    write_log_csv(log, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert len(lines[1].split(",")) == 26
    back = read_log_csv(path)
    np.testing.assert_array_equal(back.q, log.q)


def test_csv_round_trip_is_exact(tmp_path, model):
    from ctcsim.simulator import run_simulation

    sc = default_scenario()
    cfg = SimConfig(dt=1e-3, duration=0.25, initial_state=JointState(np.full(3, 0.03), np.zeros(3)))
    log = run_simulation(model, model, sc.trajectory, sc.gains, cfg)
    path = tmp_path / "log.csv"
    write_log_csv(log, path)
    back = read_log_csv(path)
    for name in ("t", "q", "qd", "qdd", "tau", "q_d", "qd_d", "qdd_d", "e", "energy"):
        np.testing.assert_array_equal(getattr(back, name), getattr(log, name))


def test_csv_values_use_scientific_notation(tmp_path, rng):
    path = tmp_path / "one.csv"
    write_log_csv(_one_row_log(rng), path)
    first = path.read_text().splitlines()[1].split(",")[1]
    assert "e" in first and len(first.split("e")[0].split(".")[1]) == 16
