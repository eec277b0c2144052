"""Rigid-body dynamics and computed-torque control simulation for serial revolute arms."""

from .controller import ControllerGains, apply_model_mismatch, computed_torque
from .dynamics import (
    JointState,
    coriolis_matrix,
    coriolis_vector,
    forward_dynamics,
    gravity_vector,
    inverse_dynamics,
    mass_matrix,
    total_energy,
)
from .io import ScenarioConfig, default_scenario, load_scenario, write_log_csv, write_scenario
from .kinematics import IkBranch, Pose, forward_kinematics, geometric_jacobian, inverse_kinematics
from .model import LinkParams, RobotModel, default_rrr_model, validate_model
from .simulator import SimConfig, SimLog, run_simulation, step_rk4
from .trajectory import Trajectory, TrajectorySample, plan_quintic, sample

__version__ = "0.1.0"
