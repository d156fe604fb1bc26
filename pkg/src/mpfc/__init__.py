"""Sampled-data model predictive path-following control for a 3-joint arm.

The package splits into the controller stack (dynamics, path, augmented,
integrator, qp, ocp, controller) and the experiment harness (plant,
scenario, acceptance, cli).  The controller never sees the plant's
friction model or gravity mismatch; everything it knows is in
CONTROLLER_VARIANT.
"""

from .augmented import (AugmentedState, VirtualState, augmented_rhs,
                        path_error, propagate_timing_law, timing_law_rhs)
from .controller import (ControllerState, configure_mode, control_step,
                         init_controller)
from .dynamics import (CONTROLLER_VARIANT, PLANT_VARIANT, JointState,
                       ModelVariant, RobotParams, forward_dynamics,
                       forward_kinematics, friction_torque, gravity_torque,
                       inertia_matrix, tip_jacobian)
from .integrator import NonConvergence, gl2_step, gl2_step_with_sensitivity, rk4_step
from .ocp import MODES, OcpConfig, RtiDiagnostics, build_qp, rti_step, shoot
from .path import (SplinePath, eval_deriv, eval_path, fit_waypoints,
                   load_waypoints, project, save_waypoints)
from .plant import (DisturbanceProfile, SimulationBlowup, VelocityEstimator,
                    estimate_velocity, plant_step)
from .qp import Infeasible, MaxIterations, QpResult, solve_qp
from .scenario import (ClosedLoopLog, LOG_COLUMNS, Scenario, compute_metrics,
                       load_scenario, run_scenario, scenario_file)

__version__ = "0.1.0"
