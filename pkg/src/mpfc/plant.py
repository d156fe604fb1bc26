"""Simulated plant: the 'true' robot plus measurement shaping.

The plant integrates the sign-friction, full-gravity model with RK4 at a
fixed sub-step of the controller period.  It applies its own gravity
compensation +g(q) scaled by (1 - gravity_comp_error): the deliberate
parameter error keeps the controller's gravity-neglect approximately, but
not exactly, justified.  External disturbances enter as joint-torque
offsets active on half-open time windows.

Joint angles are measured exactly; joint velocities are not measured but
estimated from angle finite differences through a first-order low-pass
(discretized as  y+ = a raw + (1-a) y,  a = 1 - exp(-2 pi f_c dt)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k
from .dynamics import JointState, RobotParams

Array = np.ndarray


class SimulationBlowup(RuntimeError):
    """Plant state diverged (velocity beyond any physical regime)."""


_BLOWUP_SPEED = 100.0  # rad/s


@dataclass(frozen=True)
class DisturbanceProfile:
    """Piecewise-constant joint-torque offsets.

    windows is a sequence of (t_start, t_end, offsets) with offsets a
    3-vector; each window is active on [t_start, t_end).  Windows must be
    ordered and non-overlapping.
    """

    windows: tuple = ()

    def __post_init__(self):
        norm = []
        prev_end = -np.inf
        for t0, t1, off in self.windows:
            t0, t1 = float(t0), float(t1)
            off = np.asarray(off, dtype=float).reshape(3)
            if not t1 > t0:
                raise ValueError("disturbance window must have t_end > t_start")
            if t0 < prev_end:
                raise ValueError("disturbance windows must be ordered, non-overlapping")
            prev_end = t1
            norm.append((t0, t1, off))
        object.__setattr__(self, "windows", tuple(norm))

    def torque_at(self, t: float) -> Array:
        for t0, t1, off in self.windows:
            if t0 <= t < t1:
                return off
        return np.zeros(3)


def plant_step(state: JointState, tau_applied: Array, disturbance: Array,
               h: float, params: RobotParams, gravity_comp_error: float = 0.02,
               substeps: int = 4) -> JointState:
    """Integrate the true plant over one controller period.

    The zero-order-hold effective torque is tau_applied + disturbance;
    gravity compensation is evaluated continuously inside the dynamics.
    Raises SimulationBlowup when the velocity diverges.
    """
    tau_eff = np.asarray(tau_applied, dtype=float) + np.asarray(disturbance, dtype=float)
    q, qd = _k.plant_rk4(state.q, state.qd, tau_eff,
                         1.0 - gravity_comp_error, h, substeps, params.vec)
    if np.max(np.abs(qd)) > _BLOWUP_SPEED:
        raise SimulationBlowup(f"|qdot| reached {np.max(np.abs(qd)):.1f} rad/s")
    return JointState(q, qd)


@dataclass
class VelocityEstimator:
    """Finite-difference velocity with a first-order low-pass."""

    cutoff_hz: float = 50.0
    estimate: Array = field(default_factory=lambda: np.zeros(3))
    q_prev: Array = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.cutoff_hz <= 0:
            raise ValueError("cutoff_hz must be positive")
        self.estimate = np.asarray(self.estimate, dtype=float).reshape(3).copy()
        self.q_prev = np.asarray(self.q_prev, dtype=float).reshape(3).copy()


def estimate_velocity(est: VelocityEstimator, q_now: Array, q_prev: Array,
                      delta: float) -> Array:
    """Filtered velocity estimate; updates the estimator state in place."""
    q_now = np.asarray(q_now, dtype=float)
    raw = (q_now - np.asarray(q_prev, dtype=float)) / delta
    alpha = 1.0 - np.exp(-2.0 * np.pi * est.cutoff_hz * delta)
    est.estimate = alpha * raw + (1.0 - alpha) * est.estimate
    est.q_prev = q_now.copy()
    return est.estimate.copy()
