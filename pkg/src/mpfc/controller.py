"""Sampled-data MPFC controller bookkeeping.

The controller owns the virtual timing-law state z = (theta, theta_dot):
z is never reset from measurements.  At each sample the new z comes from
evaluating the previously predicted z-trajectory at the current time,
which for the double integrator under the stored piecewise-constant v* is
closed form (theta += theta_dot dt + v dt^2/2).  Measurements enter only
through the robot block of the OCP initial state.

Warm starting reuses the previous plan unshifted: with a 1 ms sample
period against 10 ms input intervals, a shift would misalign nine samples
out of ten.  Every tenth sample, when the horizon has slid one full
interval, the plan shifts by one stage (last stage repeated).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .augmented import VirtualState, propagate_timing_law
from .dynamics import CONTROLLER_VARIANT, JointState, ModelVariant, RobotParams
from .ocp import OcpConfig, RtiDiagnostics, configure_mode, rti_step
from .path import SplinePath, project
from . import dynamics

__all__ = ["ControllerState", "init_controller", "control_step", "configure_mode"]

Array = np.ndarray


@dataclass
class ControllerState:
    """Everything the controller carries from one sample to the next."""

    z: VirtualState
    w: Array                  # current plan, dim 4N
    t: float                  # time of the last completed sample
    sample_index: int = 0
    mode: str = "speed_assigned"
    fault_count: int = 0


def init_controller(x0: JointState, path: SplinePath, cfg: OcpConfig,
                    params: RobotParams) -> ControllerState:
    """Set up the controller: theta from projecting the tip onto the path.

    theta_dot starts at zero and the plan starts as all-zero inputs
    (feasible: every input box contains zero).
    """
    tip = dynamics.forward_kinematics(x0.q, params)
    theta = project(path, tip, theta_hint=cfg.theta0)
    theta = min(max(theta, cfg.theta0), cfg.theta1)
    return ControllerState(z=VirtualState(float(theta), 0.0),
                           w=np.zeros(cfg.n_w), t=0.0, mode=cfg.mode)


def control_step(cs: ControllerState, x_meas: JointState, t: float,
                 cfg: OcpConfig, path: SplinePath, params: RobotParams,
                 variant: ModelVariant = CONTROLLER_VARIANT):
    """Advance z internally, run one RTI, return the torque to apply.

    Returns (u, new_state, RtiDiagnostics).  On an RTI fault the previous
    plan is held and its first stage applied.
    """
    if cs.sample_index > 0:
        dt = t - cs.t
        zv = propagate_timing_law(cs.z.as_vector(), cs.w[3], dt)
        theta = max(zv[0], cs.z.theta)        # clip ~1e-13 regressions
        theta_dot = max(zv[1], 0.0)           # node rows keep this >= -1e-10
        z = VirtualState(theta, theta_dot)
    else:
        z = cs.z

    w_warm = cs.w
    if cs.sample_index > 0 and cs.sample_index % cfg.n_intervals == 0:
        w_warm = np.concatenate([w_warm[4:], w_warm[-4:]])

    s0 = np.concatenate([x_meas.q, x_meas.qd, z.as_vector()])
    w_new, diag = rti_step(s0, w_warm, cfg, path, params, variant)

    new_state = ControllerState(
        z=z, w=w_new, t=t, sample_index=cs.sample_index + 1, mode=cs.mode,
        fault_count=cs.fault_count + int(diag.fault))
    return w_new[0:3].copy(), new_state, diag
