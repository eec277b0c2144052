"""Scenario files (JSON) and simulation logs (CSV)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .controller import ControllerGains
from .dynamics import JointState
from .errors import ScenarioError
from .model import LinkParams, RobotModel, default_rrr_model, validate_model
from .simulator import SimConfig, SimLog
from .trajectory import Trajectory, plan_quintic

SCHEMA_VERSION = 1

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_VEC3 = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}
_POS_VEC = {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1}

LINK_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["a", "alpha", "d", "mass", "com", "inertia"],
    "properties": {
        "a": _NUM,
        "alpha": _NUM,
        "d": _NUM,
        "theta_offset": _NUM,
        "mass": _NUM,
        "com": _VEC3,
        "inertia": {"type": "array", "items": _VEC3, "minItems": 3, "maxItems": 3},
    },
}

MODEL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["links"],
    "properties": {
        "name": {"type": "string"},
        "gravity": _VEC3,
        "links": {"type": "array", "items": LINK_SCHEMA, "minItems": 1},
    },
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ctcsim scenario",
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "trajectory"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "units": {"enum": ["m", "mm"]},
        "model": {"type": ["string", "object"]},
        "trajectory": {
            "type": "object",
            "additionalProperties": False,
            "required": ["start_q", "end_q", "T"],
            "properties": {
                "type": {"const": "quintic"},
                "start_q": _VEC,
                "end_q": _VEC,
                "T": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "gains": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kp", "kv"],
            "properties": {"kp": _POS_VEC, "kv": _POS_VEC},
        },
        "sim": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "duration": {"type": "number", "exclusiveMinimum": 0},
                "control_period": {"type": "number", "exclusiveMinimum": 0},
                "initial_q": _VEC,
                "initial_qd": _VEC,
            },
        },
        "payload_mass": {"type": "number", "minimum": 0},
    },
}

_LENGTH_SCALE = {"m": 1.0, "mm": 1e-3}


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully validated scenario in SI units."""

    model: RobotModel
    trajectory: Trajectory
    gains: ControllerGains
    sim: SimConfig
    payload_mass: float = 0.0


def _dotted(path) -> str:
    out = ""
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def _check(instance, schema, prefix: str = ""):
    validator = jsonschema.Draft202012Validator(schema)
    error = jsonschema.exceptions.best_match(validator.iter_errors(instance))
    if error is None:
        return
    path = list(error.absolute_path)
    field = _dotted([prefix] + path if prefix else path)
    raise ScenarioError(f"{field}: {error.message}", field=field)


def _model_from_dict(doc: dict, scale: float) -> RobotModel:
    _check(doc, MODEL_SCHEMA, prefix="model")
    links = []
    for entry in doc["links"]:
        links.append(LinkParams(
            a=entry["a"] * scale,
            alpha=entry["alpha"],
            d=entry["d"] * scale,
            theta_offset=entry.get("theta_offset", 0.0),
            mass=entry["mass"],
            com=np.array(entry["com"], dtype=float) * scale,
            inertia=np.array(entry["inertia"], dtype=float) * scale**2,
        ))
    gravity = doc.get("gravity")
    gravity = default_rrr_model().gravity if gravity is None else np.array(gravity, float) * scale
    return RobotModel(links=tuple(links), gravity=gravity, name=doc.get("name", "custom"))


def _sized(values, n: int, field: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != (n,):
        raise ScenarioError(f"{field}: expected {n} entries, got {arr.size}", field=field)
    return arr


def scenario_from_dict(data) -> ScenarioConfig:
    """Validate a decoded scenario document and build the config."""
    _check(data, SCENARIO_SCHEMA)
    scale = _LENGTH_SCALE[data.get("units", "m")]

    raw_model = data["model"]
    if isinstance(raw_model, str):
        if raw_model != "default_rrr":
            raise ScenarioError(f"model: unknown preset {raw_model!r}", field="model")
        model = default_rrr_model()
    else:
        model = _model_from_dict(raw_model, scale)
    violations = validate_model(model)
    if violations:
        raise ScenarioError("model: " + "; ".join(violations), field="model")
    n = model.n

    tr = data["trajectory"]
    traj = plan_quintic(
        _sized(tr["start_q"], n, "trajectory.start_q"),
        _sized(tr["end_q"], n, "trajectory.end_q"),
        tr["T"],
    )

    if "gains" in data:
        gains = ControllerGains(
            kp=_sized(data["gains"]["kp"], n, "gains.kp"),
            kv=_sized(data["gains"]["kv"], n, "gains.kv"),
        )
    else:
        gains = ControllerGains.uniform(n)

    sim = data.get("sim", {})
    initial = JointState(
        _sized(sim.get("initial_q", traj.start_q), n, "sim.initial_q"),
        _sized(sim.get("initial_qd", np.zeros(n)), n, "sim.initial_qd"),
    )
    defaults = SimConfig()
    try:
        cfg = SimConfig(
            dt=sim.get("dt", defaults.dt),
            duration=sim.get("duration", defaults.duration),
            control_period=sim.get("control_period"),
            initial_state=initial,
        )
    except ValueError as exc:
        raise ScenarioError(str(exc), field="sim") from exc

    return ScenarioConfig(
        model=model, trajectory=traj, gains=gains, sim=cfg,
        payload_mass=float(data.get("payload_mass", 0.0)),
    )


def load_scenario(path) -> ScenarioConfig:
    """Read, unit-convert and validate a JSON scenario file.

    Raises:
        ScenarioError: on malformed JSON (with line and column), unknown
            fields, or values failing validation.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return scenario_from_dict(data)


def model_to_dict(model: RobotModel):
    if model == default_rrr_model():
        return "default_rrr"
    return {
        "name": model.name,
        "gravity": model.gravity.tolist(),
        "links": [
            {
                "a": link.a, "alpha": link.alpha, "d": link.d,
                "theta_offset": link.theta_offset, "mass": link.mass,
                "com": link.com.tolist(), "inertia": link.inertia.tolist(),
            }
            for link in model.links
        ],
    }


def scenario_to_dict(config: ScenarioConfig) -> dict:
    sim = config.sim
    return {
        "schema_version": SCHEMA_VERSION,
        "units": "m",
        "model": model_to_dict(config.model),
        "trajectory": {
            "type": config.trajectory.kind,
            "start_q": config.trajectory.start_q.tolist(),
            "end_q": config.trajectory.end_q.tolist(),
            "T": config.trajectory.T,
        },
        "gains": {"kp": config.gains.kp.tolist(), "kv": config.gains.kv.tolist()},
        "sim": {
            "dt": sim.dt,
            "duration": sim.duration,
            "control_period": sim.control_period,
            "initial_q": sim.initial_state.q.tolist(),
            "initial_qd": sim.initial_state.qd.tolist(),
        },
        "payload_mass": config.payload_mass,
    }


def write_scenario(config: ScenarioConfig, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(config), indent=2) + "\n", encoding="utf-8")


def default_scenario() -> ScenarioConfig:
    """Rest-to-rest move (0, 0, 0) -> (pi/2, pi/4, -pi/3) rad in 2 s, 3 s run."""
    return scenario_from_dict({
        "model": "default_rrr",
        "trajectory": {"start_q": [0.0, 0.0, 0.0],
                       "end_q": [np.pi / 2, np.pi / 4, -np.pi / 3], "T": 2.0},
    })


# CSV logs --------------------------------------------------------------------

CSV_FORMAT = "%.16e"

# Per-joint column groups of the log, in file order.
LOG_GROUPS = (
    ("q", "q"),
    ("qd", "qd"),
    ("qdd", "qdd"),
    ("tau", "tau"),
    ("q_d", "qd_ref"),
    ("qd_d", "qdref_d"),
    ("qdd_d", "qddref_d"),
    ("e", "e"),
)


def log_header(n: int) -> list[str]:
    cols = ["t"]
    for _, prefix in LOG_GROUPS:
        cols += [f"{prefix}{j}" for j in range(1, n + 1)]
    return cols + ["energy"]


def log_table(log: SimLog) -> np.ndarray:
    parts = [log.t[:, None]] + [getattr(log, attr) for attr, _ in LOG_GROUPS] + [log.energy[:, None]]
    return np.hstack(parts)


def write_table_csv(path, header: list[str], table: np.ndarray) -> None:
    np.savetxt(path, np.atleast_2d(table), fmt=CSV_FORMAT, delimiter=",",
               header=",".join(header), comments="")


def write_log_csv(log: SimLog, path) -> None:
    """One row per log entry; 2 + 8n columns in full double precision."""
    write_table_csv(path, log_header(log.n), log_table(log))


def read_log_csv(path) -> SimLog:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    n = (len(header) - 2) // 8
    if header != log_header(n):
        raise ValueError(f"{path}: not a simulation log header")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    groups = {attr: data[:, 1 + g * n: 1 + (g + 1) * n] for g, (attr, _) in enumerate(LOG_GROUPS)}
    dt = float(data[1, 0] - data[0, 0]) if len(data) > 1 else 0.0
    return SimLog(t=data[:, 0], energy=data[:, -1], dt=dt, **groups)
