"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io
from .controller import apply_model_mismatch
from .dynamics import inverse_dynamics
from .errors import DimensionError, ModelError, ScenarioError, SimulationError, UnreachableError
from .kinematics import IkBranch, forward_kinematics, inverse_kinematics
from .model import default_rrr_model
from .simulator import run_simulation
from .trajectory import sample_many

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _model(args):
    return io.load_scenario(args.config).model if args.config else default_rrr_model()


def _reference_table(config):
    """Reference samples on the simulation time grid: t, q_d, qd_d, qdd_d."""
    sim = config.sim
    t = np.arange(sim.n_steps + 1) * sim.dt
    q_d, qd_d, qdd_d = sample_many(config.trajectory, t)
    return t, q_d, qd_d, qdd_d


def _ref_header(n):
    return ["t"] + [f"{prefix}{j}" for prefix in ("qd_ref", "qdref_d", "qddref_d")
                    for j in range(1, n + 1)]


def cmd_simulate(args) -> int:
    config = io.load_scenario(args.config)
    plant = apply_model_mismatch(config.model, config.payload_mass)
    log = run_simulation(plant, config.model, config.trajectory, config.gains, config.sim)
    io.write_log_csv(log, args.out)
    print(f"wrote {len(log)} rows to {args.out}; peak tracking error {log.max_abs_error():.3e} rad",
          file=sys.stderr)
    return EXIT_OK


def cmd_plan(args) -> int:
    config = io.load_scenario(args.config)
    t, q_d, qd_d, qdd_d = _reference_table(config)
    io.write_table_csv(args.out, _ref_header(config.model.n),
                       np.column_stack([t, q_d, qd_d, qdd_d]))
    return EXIT_OK


def cmd_id(args) -> int:
    config = io.load_scenario(args.config)
    model = config.model
    t, q_d, qd_d, qdd_d = _reference_table(config)
    tau = np.array([inverse_dynamics(model, *row) for row in zip(q_d, qd_d, qdd_d)])
    header = _ref_header(model.n) + [f"tau{j}" for j in range(1, model.n + 1)]
    io.write_table_csv(args.out, header, np.column_stack([t, q_d, qd_d, qdd_d, tau]))
    return EXIT_OK


def cmd_fk(args) -> int:
    pose = forward_kinematics(_model(args), args.q)
    print(" ".join(f"{x:.6f}" for x in pose.position))
    return EXIT_OK


def cmd_ik(args) -> int:
    sol = inverse_kinematics(_model(args), args.target, IkBranch(args.branch))
    if sol.singular:
        print("warning: target on the shoulder axis, q1 set to 0", file=sys.stderr)
    print(" ".join(f"{x:.6f}" for x in sol.q))
    return EXIT_OK


def cmd_checks(args) -> int:
    from .checks import run_checks

    return EXIT_OK if run_checks() else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ctcsim", description="Computed-torque control of serial revolute arms.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, func, help_text in (
        ("simulate", cmd_simulate, "closed-loop simulation, full log as CSV"),
        ("plan", cmd_plan, "reference trajectory samples as CSV"),
        ("id", cmd_id, "open-loop inverse-dynamics torque along the reference"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", required=True, help="output CSV path")
        p.set_defaults(func=func)

    p = sub.add_parser("fk", help="forward kinematics of the end effector")
    p.add_argument("--q", type=_floats, required=True, help="joint angles, e.g. 0,0.5,-0.3")
    p.add_argument("--config", help="take the model from this scenario instead of the default arm")
    p.set_defaults(func=cmd_fk)

    p = sub.add_parser("ik", help="geometric inverse kinematics (position only)")
    p.add_argument("--target", type=_floats, required=True, help="x,y,z in metres")
    p.add_argument("--branch", choices=[b.value for b in IkBranch], default="up")
    p.add_argument("--config", help="take the model from this scenario instead of the default arm")
    p.set_defaults(func=cmd_ik)

    p = sub.add_parser("checks", help="run the self-verification suite")
    p.set_defaults(func=cmd_checks)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UnreachableError as exc:
        print(f"error: unreachable: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ScenarioError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SimulationError, ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
