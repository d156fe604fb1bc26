"""Augmented system: robot block + virtual timing law.

The path parameter theta is generated by a double integrator
(z = (theta, theta_dot), theta_dd = v) driven by the virtual input v.
Stacking it under the robot gives the block-diagonal augmented model

    d/dt (x, z) = (f(x, u), l(z, v))

whose output of interest is the path error e = h(q) - p(theta) together
with z itself.  The controller-side robot block uses the smoothed friction
law and neglects gravity (the plant compensates gravity itself).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .dynamics import CONTROLLER_VARIANT, JointState, ModelVariant, RobotParams
from .path import SplinePath, eval_path

Array = np.ndarray


@dataclass
class VirtualState:
    """Timing-law state z = (theta, theta_dot)."""

    theta: float
    theta_dot: float

    def as_vector(self) -> Array:
        return np.array([self.theta, self.theta_dot])


@dataclass
class AugmentedState:
    robot: JointState
    virtual: VirtualState

    def as_vector(self) -> Array:
        return np.concatenate([self.robot.q, self.robot.qd, self.virtual.as_vector()])

    @staticmethod
    def from_vector(s: Array) -> "AugmentedState":
        s = np.asarray(s, dtype=float)
        return AugmentedState(JointState(s[0:3], s[3:6]), VirtualState(s[6], s[7]))


def timing_law_rhs(z: Array, v: float) -> Array:
    """Double integrator: d(theta, theta_dot)/dt = (theta_dot, v)."""
    return np.array([z[1], float(v)])


def propagate_timing_law(z: Array, v: float, dt: float) -> Array:
    """Closed-form flow of the double integrator under constant v."""
    return np.array([z[0] + z[1] * dt + 0.5 * v * dt * dt, z[1] + v * dt])


def augmented_rhs(s: Array, uv: Array, params: RobotParams,
                  variant: ModelVariant = CONTROLLER_VARIANT) -> Array:
    """Time derivative of the augmented state s = (q, qd, theta, theta_dot)."""
    s = np.asarray(s, dtype=float)
    uv = np.asarray(uv, dtype=float)
    return _k.aug_rhs(s, uv[0:3].copy(), float(uv[3]), variant.fric_mode,
                      variant.grav_on, params.vec)


def augmented_rhs_jacobians(s: Array, uv: Array, params: RobotParams,
                            variant: ModelVariant = CONTROLLER_VARIANT):
    """(A, B) = (df/ds, df/d(u,v)); A is block diagonal in (x, z)."""
    s = np.asarray(s, dtype=float)
    uv = np.asarray(uv, dtype=float)
    return _k.aug_rhs_jac(s, uv[0:3].copy(), float(uv[3]), variant.fric_mode,
                          variant.grav_on, params.vec)


def path_error(q: Array, theta: float, path: SplinePath, params: RobotParams) -> Array:
    """e = h(q) - p(theta), the deviation of the tip from the path point."""
    return _k.tip_position(np.asarray(q, float), params.vec) - eval_path(path, theta)
