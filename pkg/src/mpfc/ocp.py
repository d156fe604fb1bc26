"""Path-following OCP: single shooting, Gauss-Newton QP, real-time iteration.

The decision vector stacks the piecewise-constant stage inputs

    w = (u_0, v_0, u_1, v_1, ..., u_{N-1}, v_{N-1}),    dim 4N,

over N equidistant intervals of the prediction horizon.  `shoot`
integrates the augmented model with the implicit-midpoint rule and
propagates forward sensitivities; the tracking cost is the rectangle-rule
sum  J = sum_k h ||r_k||^2  over the left interval nodes with

    r_k = ( sqrt(w_e) e_k, sqrt(w_theta)(theta_k - theta1),
            sqrt(w_thetadot)(theta_dot_k - ref), sqrt(r_u) u_k, sqrt(r_v) v_k ).

`rti_step` performs exactly one Gauss-Newton step per sample: linearize at
the warm start, solve one inequality-constrained QP (input boxes plus the
state bounds linearized at the shooting nodes), and return the updated
plan.  No iteration to convergence happens inside a sample; convergence is
left to the closed loop, which re-linearizes 1 ms later.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels as _k
from .dynamics import CONTROLLER_VARIANT, ModelVariant, RobotParams
from .integrator import NonConvergence
from .path import SplinePath
from .qp import Infeasible, MaxIterations, solve_qp

Array = np.ndarray

MODES = ("stop_at_end", "speed_assigned")


@dataclass(frozen=True)
class OcpConfig:
    """Weights, bounds and discretization of the path-following OCP."""

    mode: str = "speed_assigned"
    horizon: float = 0.1
    n_intervals: int = 10
    integrator_steps: int = 1
    w_e: float = 1e7
    w_theta: float = 0.0
    w_thetadot: float = 3e-4
    r_u: float = 0.5
    r_v: float = 1e-7
    theta0: float = 0.0
    theta1: float = np.inf
    thetadot_ref: float = 250.0
    tau_max: float = 60.0
    qdot_max: float = 0.6
    v_lo: float = -1e4
    v_hi: float = 8e3
    newton_tol: float = 1e-12
    newton_max_iter: int = 20

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.horizon <= 0 or self.n_intervals < 1 or self.integrator_steps < 1:
            raise ValueError("horizon, n_intervals, integrator_steps must be positive")
        if self.w_e < 0 or self.w_theta < 0 or self.w_thetadot < 0:
            raise ValueError("state weights must be nonnegative")
        if (self.w_theta > 0) == (self.w_thetadot > 0):
            raise ValueError("exactly one of w_theta, w_thetadot must be nonzero")
        if self.r_u <= 0 or self.r_v <= 0:
            raise ValueError("input weights must be positive")
        if self.tau_max <= 0 or self.qdot_max <= 0:
            raise ValueError("tau_max and qdot_max must be positive")
        if not self.v_lo < self.v_hi:
            raise ValueError("v_lo must be below v_hi")
        if not self.theta1 > self.theta0:
            raise ValueError("theta1 must exceed theta0")
        if self.mode == "stop_at_end":
            if self.w_theta <= 0:
                raise ValueError("stop_at_end requires w_theta > 0")
            if not np.isfinite(self.theta1):
                raise ValueError("stop_at_end requires finite theta1")
        else:
            if self.w_thetadot <= 0:
                raise ValueError("speed_assigned requires w_thetadot > 0")

    @property
    def h(self) -> float:
        return self.horizon / self.n_intervals

    @property
    def n_w(self) -> int:
        return 4 * self.n_intervals

    def input_bounds(self):
        """(lb, ub) for the full decision vector."""
        lb = np.tile([-self.tau_max, -self.tau_max, -self.tau_max, self.v_lo],
                     self.n_intervals)
        ub = np.tile([self.tau_max, self.tau_max, self.tau_max, self.v_hi],
                     self.n_intervals)
        return lb, ub


def configure_mode(cfg: OcpConfig, mode: str) -> OcpConfig:
    """Return a copy of cfg with the mode-specific constraint pattern.

    stop_at_end keeps theta bounded above by theta1 (which must be finite
    and is also the resting target of the w_theta penalty); speed_assigned
    removes the upper theta bound.  Configs with both timing weights
    nonzero are rejected by construction.
    """
    if mode == "speed_assigned":
        return replace(cfg, mode=mode, theta1=np.inf)
    if mode == "stop_at_end":
        return replace(cfg, mode=mode)
    raise ValueError(f"mode must be one of {MODES}")


@dataclass
class ShootingResult:
    """Nodes, sensitivities, and weighted residuals of one shooting pass."""

    w: Array                 # the decision vector that was shot
    nodes: Array             # (N+1, 8) augmented states
    sens: Array              # (N+1, 8, 4N) d node / d w
    resid: Array             # (N, 9) weighted stage residuals
    resid_jac: Array         # (N, 9, 4N)
    cost: float


@dataclass
class RtiDiagnostics:
    cost: float = np.nan
    step_norm: float = np.nan
    qp_iterations: int = 0
    wall_time: float = 0.0
    fault: bool = False
    fallback: bool = False


def shoot(x0z0: Array, w: Array, cfg: OcpConfig, path: SplinePath,
          params: RobotParams, variant: ModelVariant = CONTROLLER_VARIANT) -> ShootingResult:
    """Integrate the augmented model over the horizon under the plan w.

    Raises NonConvergence if an implicit-midpoint stage fails.
    """
    s0 = np.asarray(x0z0, dtype=float)
    w = np.asarray(w, dtype=float)
    W = np.ascontiguousarray(w.reshape(cfg.n_intervals, 4))
    nodes, sens, fail = _k.shoot_nodes(
        s0, W, cfg.h, cfg.integrator_steps, variant.fric_mode, variant.grav_on,
        params.vec, cfg.newton_tol, cfg.newton_max_iter)
    if fail >= 0:
        raise NonConvergence(f"integrator stage failed in horizon interval {fail}")
    r, J, cost = _k.stage_residuals(
        nodes, sens, W, cfg.h, path.theta0, path.theta1, path.coeffs,
        np.sqrt(cfg.w_e), np.sqrt(cfg.w_theta),
        cfg.theta1 if cfg.w_theta > 0 else 0.0,
        np.sqrt(cfg.w_thetadot), cfg.thetadot_ref,
        np.sqrt(cfg.r_u), np.sqrt(cfg.r_v), params.vec)
    return ShootingResult(w=w, nodes=nodes, sens=sens, resid=r, resid_jac=J,
                          cost=float(cost))


def build_qp(sr: ShootingResult, cfg: OcpConfig):
    """Assemble the Gauss-Newton QP in the step Dw = w_new - w.

    Returns (H, g, A, b, lb, ub): H is the regularized Gauss-Newton
    Hessian, A/b the state bounds linearized at the shooting nodes
    (velocity box, theta window, theta_dot >= 0), lb/ub the input-box step
    bounds.
    """
    N = cfg.n_intervals
    nw = cfg.n_w
    h = cfg.h
    Jbig = sr.resid_jac.reshape(9 * N, nw)
    rbig = sr.resid.reshape(9 * N)
    H = 2.0 * h * (Jbig.T @ Jbig)
    eps = 1e-8 * np.trace(H) / nw
    H[np.diag_indices_from(H)] += eps
    g = 2.0 * h * (Jbig.T @ rbig)

    lbw, ubw = cfg.input_bounds()
    lb = lbw - sr.w
    ub = ubw - sr.w

    rows = []
    rhs = []
    for k in range(1, N + 1):
        S = sr.sens[k]
        qd = sr.nodes[k, 3:6]
        th = sr.nodes[k, 6]
        thd = sr.nodes[k, 7]
        if np.isfinite(cfg.qdot_max):
            rows.append(S[3:6, :])
            rhs.append(cfg.qdot_max - qd)
            rows.append(-S[3:6, :])
            rhs.append(cfg.qdot_max + qd)
        rows.append(-S[7:8, :])
        rhs.append(np.array([thd]))
        if np.isfinite(cfg.theta1):
            rows.append(S[6:7, :])
            rhs.append(np.array([cfg.theta1 - th]))
        rows.append(-S[6:7, :])
        rhs.append(np.array([th - cfg.theta0]))
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    return H, g, A, b, lb, ub


def rti_step(x0z0: Array, w_warm: Array, cfg: OcpConfig, path: SplinePath,
             params: RobotParams, variant: ModelVariant = CONTROLLER_VARIANT):
    """One real-time iteration: shoot, linearize, solve one QP.

    Returns (w_new, RtiDiagnostics).  Integrator or QP infeasibility
    faults keep the warm plan (the caller re-tries next sample); a QP
    iteration overrun falls back to the bound-projected unconstrained
    step.
    """
    t0 = time.perf_counter()
    w_warm = np.asarray(w_warm, dtype=float)
    try:
        sr = shoot(x0z0, w_warm, cfg, path, params, variant)
    except NonConvergence:
        return w_warm.copy(), RtiDiagnostics(wall_time=time.perf_counter() - t0,
                                             fault=True)
    H, g, A, b, lb, ub = build_qp(sr, cfg)
    fallback = False
    qp_iters = 0
    try:
        res = solve_qp(H, g, A, b, lb, ub)
        dw = res.x
        qp_iters = res.iterations
    except MaxIterations:
        dw = np.clip(np.linalg.solve(H, -g), lb, ub)
        fallback = True
    except Infeasible:
        return w_warm.copy(), RtiDiagnostics(cost=sr.cost,
                                             wall_time=time.perf_counter() - t0,
                                             fault=True)
    lbw, ubw = cfg.input_bounds()
    w_new = np.clip(w_warm + dw, lbw, ubw)
    return w_new, RtiDiagnostics(cost=sr.cost, step_norm=float(np.linalg.norm(dw)),
                                 qp_iterations=qp_iters,
                                 wall_time=time.perf_counter() - t0,
                                 fault=False, fallback=fallback)
