"""Rigid-body dynamics of the 3-joint arm.

The chain is a deliberately simple stand-in for the first three pitch/yaw
joints of a lightweight robot arm:

* joint 1 rotates the whole arm about the world z axis (base rotation);
  link 1 is a vertical column of length L1 whose COM sits on the axis,
* joint 2 pitches link 2 in the vertical plane that rotates with joint 1;
  the angle is measured from the upward vertical,
* joint 3 is the elbow between link 2 and link 3 (same axis direction).

Each link contributes a point mass m_i at COM offset c_i along the link
plus a fixed rotor-style inertia I_i about its own joint axis (I1 about z,
I2/I3 about the in-plane pitch axes, using absolute in-plane rates).  With
s2 = sin q2, s23 = sin(q2+q3) the kinetic and potential energies are

    T = 1/2 I1 qd1^2 + 1/2 I2 qd2^2 + 1/2 I3 (qd2+qd3)^2
      + 1/2 m2 [c2^2 qd2^2 + (c2 s2)^2 qd1^2]
      + 1/2 m3 [L2^2 qd2^2 + c3^2 (qd2+qd3)^2
                + 2 L2 c3 cos(q3) qd2 (qd2+qd3) + r3^2 qd1^2]
    U = g [m2 (L1 + c2 cos q2) + m3 (L1 + L2 cos q2 + c3 cos(q2+q3))] + const

with r3 = L2 s2 + c3 s23 the radial COM distance of link 3.  B(q) is the
Hessian of T in qd, C(q, qd) is assembled from the Christoffel symbols of
B (so that Bdot - 2C is skew-symmetric), and g(q) = dU/dq.

The equations of motion are  B(q) qdd + C(q, qd) qd + tau_F(qd) + g(q) = tau
with joint friction tau_F,i = viscous_i qd_i + coulomb_i * sigma(qd_i);
sigma is sign() for the true plant and (2/pi) atan(qd_i / eps) for the
controller model, which also neglects gravity (the plant carries its own
gravity compensation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k

Array = np.ndarray

FRICTION_MODES = ("sign", "arctan")
GRAVITY_MODES = ("full", "neglected")


@dataclass(frozen=True)
class RobotParams:
    """Kinematic and dynamic parameters of the 3-link chain."""

    link_lengths: Array = field(default_factory=lambda: np.array([0.4, 0.4, 0.4]))
    link_masses: Array = field(default_factory=lambda: np.array([4.0, 3.0, 2.0]))
    link_com_offsets: Array = field(default_factory=lambda: np.array([0.2, 0.2, 0.2]))
    link_inertias: Array = field(default_factory=lambda: np.array([0.20, 0.15, 0.10]))
    viscous_friction: Array = field(default_factory=lambda: np.array([8.0, 8.0, 6.0]))
    coulomb_friction: Array = field(default_factory=lambda: np.array([1.5, 1.5, 1.0]))
    coulomb_smoothing: float = 0.05
    gravity_accel: float = 9.81

    def __post_init__(self):
        for name in ("link_lengths", "link_masses", "link_com_offsets",
                     "link_inertias", "viscous_friction", "coulomb_friction"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (3,):
                raise ValueError(f"{name} must have shape (3,), got {arr.shape}")
            object.__setattr__(self, name, arr)
        if np.any(self.link_lengths <= 0) or np.any(self.link_masses <= 0):
            raise ValueError("link lengths and masses must be positive")
        if np.any(self.link_inertias <= 0):
            raise ValueError("link inertias must be positive")
        if np.any(self.link_com_offsets < 0) or np.any(self.link_com_offsets > self.link_lengths):
            raise ValueError("COM offsets must lie within the link")
        if np.any(self.viscous_friction < 0) or np.any(self.coulomb_friction < 0):
            raise ValueError("friction coefficients must be nonnegative")
        if self.coulomb_smoothing <= 0:
            raise ValueError("coulomb_smoothing must be positive")
        object.__setattr__(self, "_vec", self.as_vector())

    def as_vector(self) -> Array:
        """Pack into the flat layout used by the compiled kernels."""
        return np.concatenate([
            self.link_lengths, self.link_masses, self.link_com_offsets,
            self.link_inertias, self.viscous_friction, self.coulomb_friction,
            [self.coulomb_smoothing, self.gravity_accel],
        ])

    @property
    def vec(self) -> Array:
        return self._vec


@dataclass
class JointState:
    """Joint angles and rates."""

    q: Array
    qd: Array

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float).reshape(3).copy()
        self.qd = np.asarray(self.qd, dtype=float).reshape(3).copy()


@dataclass(frozen=True)
class ModelVariant:
    """Which friction law / gravity handling a model evaluation uses."""

    friction: str = "arctan"
    gravity: str = "neglected"

    def __post_init__(self):
        if self.friction not in FRICTION_MODES:
            raise ValueError(f"friction must be one of {FRICTION_MODES}")
        if self.gravity not in GRAVITY_MODES:
            raise ValueError(f"gravity must be one of {GRAVITY_MODES}")

    @property
    def fric_mode(self) -> int:
        return 0 if self.friction == "sign" else 1

    @property
    def grav_on(self) -> int:
        return 1 if self.gravity == "full" else 0


PLANT_VARIANT = ModelVariant(friction="sign", gravity="full")
CONTROLLER_VARIANT = ModelVariant(friction="arctan", gravity="neglected")


# ---------------------------------------------------------------------------
# model terms
# ---------------------------------------------------------------------------

def inertia_matrix(q: Array, params: RobotParams) -> Array:
    """B(q): symmetric positive definite joint-space inertia."""
    return _k.inertia(np.asarray(q, float), params.vec)


def inertia_matrix_partials(q: Array, params: RobotParams) -> Array:
    """Tensor dB[i, j, k] = dB_ij/dq_k."""
    return _k.inertia_partials(np.asarray(q, float), params.vec)


def coriolis_matrix(q: Array, qd: Array, params: RobotParams) -> Array:
    """C(q, qd) from Christoffel symbols; C qd is the velocity torque."""
    return _k.coriolis(np.asarray(q, float), np.asarray(qd, float), params.vec)


def gravity_torque(q: Array, params: RobotParams) -> Array:
    """g(q) = dU/dq; identically zero on joint 1."""
    return _k.gravity(np.asarray(q, float), params.vec)


def friction_torque(qd: Array, variant: ModelVariant, params: RobotParams) -> Array:
    return _k.friction(np.asarray(qd, float), variant.fric_mode, params.vec)


def forward_kinematics(q: Array, params: RobotParams) -> Array:
    """World position of the tool tip."""
    return _k.tip_position(np.asarray(q, float), params.vec)


def tip_jacobian(q: Array, params: RobotParams) -> Array:
    """d(tip)/dq, 3x3."""
    return _k.tip_jacobian(np.asarray(q, float), params.vec)


def forward_dynamics(state: JointState, tau: Array, variant: ModelVariant,
                     params: RobotParams) -> Array:
    """qdd solving B qdd + C qd + tau_F + [g] = tau for the given variant."""
    return _k.robot_accel(state.q, state.qd, np.asarray(tau, float),
                          variant.fric_mode, variant.grav_on, params.vec)


def com_positions(q: Array, params: RobotParams) -> Array:
    """World positions of the three link COMs (rows)."""
    q = np.asarray(q, float)
    L1, L2, _ = params.link_lengths
    c1off, c2off, c3off = params.link_com_offsets
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s2, c2 = np.sin(q[1]), np.cos(q[1])
    s23, c23 = np.sin(q[1] + q[2]), np.cos(q[1] + q[2])
    out = np.zeros((3, 3))
    out[0] = (0.0, 0.0, c1off)
    r2 = c2off * s2
    out[1] = (r2 * c1, r2 * s1, L1 + c2off * c2)
    r3 = L2 * s2 + c3off * s23
    out[2] = (r3 * c1, r3 * s1, L1 + L2 * c2 + c3off * c23)
    return out


def kinetic_energy(q: Array, qd: Array, params: RobotParams) -> float:
    """T(q, qd) computed from link COM velocities, independent of B(q).

    Translational part from the explicit COM velocity components
    (in-plane + azimuthal), rotational part from the rotor inertias.
    """
    q = np.asarray(q, float)
    qd = np.asarray(qd, float)
    L2 = params.link_lengths[1]
    m2, m3 = params.link_masses[1], params.link_masses[2]
    c2off, c3off = params.link_com_offsets[1], params.link_com_offsets[2]
    I1, I2, I3 = params.link_inertias
    s2 = np.sin(q[1])
    s23 = np.sin(q[1] + q[2])
    # link 2 COM: radial r2 = c2 sin q2, height L1 + c2 cos q2
    r2 = c2off * s2
    v2_sq = (c2off * qd[1]) ** 2 + (r2 * qd[0]) ** 2
    # link 3 COM in-plane velocity: rod from the shoulder plus elbow offset
    w23 = qd[1] + qd[2]
    inplane_sq = (L2 * qd[1]) ** 2 + (c3off * w23) ** 2 \
        + 2.0 * L2 * c3off * np.cos(q[2]) * qd[1] * w23
    r3 = L2 * s2 + c3off * s23
    v3_sq = inplane_sq + (r3 * qd[0]) ** 2
    rot = 0.5 * (I1 * qd[0] ** 2 + I2 * qd[1] ** 2 + I3 * w23 ** 2)
    return rot + 0.5 * (m2 * v2_sq + m3 * v3_sq)


def potential_energy(q: Array, params: RobotParams) -> float:
    """U(q) from COM heights (gravitational only)."""
    heights = com_positions(q, params)[:, 2]
    return float(params.gravity_accel * np.dot(params.link_masses, heights))


def total_energy(state: JointState, params: RobotParams) -> float:
    return kinetic_energy(state.q, state.qd, params) + potential_energy(state.q, params)
