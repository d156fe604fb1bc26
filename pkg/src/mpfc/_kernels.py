"""Compiled numerical kernels.

Everything here operates on plain float64 arrays so numba can compile it.
The public modules (:mod:`mpfc.dynamics`, :mod:`mpfc.ocp`, ...) wrap these
kernels with the documented dataclass API.

Robot parameter vector layout (see ``RobotParams.as_vector``):

    pv[0:3]   link lengths L1..L3          [m]
    pv[3:6]   link masses m1..m3           [kg]
    pv[6:9]   COM offsets c1..c3           [m, along the link from its joint]
    pv[9:12]  rotor inertias I1..I3        [kg m^2, about the joint axis]
    pv[12:15] viscous friction             [N m s/rad]
    pv[15:18] Coulomb friction             [N m]
    pv[18]    Coulomb smoothing eps        [rad/s]
    pv[19]    gravity acceleration         [m/s^2]

Friction mode: 0 = sign (true plant), 1 = smoothed 2/pi*atan (controller).
Augmented state layout: s = (q1,q2,q3, qd1,qd2,qd3, theta, theta_dot).
Input layout per stage: (u1,u2,u3, v).
"""

from __future__ import annotations

import numpy as np
from numba import njit

TWO_OVER_PI = 2.0 / np.pi


# ---------------------------------------------------------------------------
# rigid-body terms
# ---------------------------------------------------------------------------

@njit(cache=True)
def inertia(q, pv):
    """Joint-space inertia matrix B(q), 3x3 symmetric positive definite."""
    L2 = pv[1]
    m2, m3 = pv[4], pv[5]
    c2, c3 = pv[7], pv[8]
    I1, I2, I3 = pv[9], pv[10], pv[11]
    s2 = np.sin(q[1])
    c3q = np.cos(q[2])
    s23 = np.sin(q[1] + q[2])
    r3 = L2 * s2 + c3 * s23  # radial distance of link-3 COM from the base axis
    B = np.zeros((3, 3))
    B[0, 0] = I1 + m2 * (c2 * s2) ** 2 + m3 * r3 * r3
    B[1, 1] = I2 + I3 + m2 * c2 * c2 + m3 * (L2 * L2 + c3 * c3 + 2.0 * L2 * c3 * c3q)
    B[1, 2] = I3 + m3 * (c3 * c3 + L2 * c3 * c3q)
    B[2, 1] = B[1, 2]
    B[2, 2] = I3 + m3 * c3 * c3
    return B


@njit(cache=True)
def inertia_partials(q, pv):
    """dB[i,j,k] = dB_ij/dq_k.  B depends on q2, q3 only."""
    L2 = pv[1]
    m2, m3 = pv[4], pv[5]
    c2, c3 = pv[7], pv[8]
    s2, c2q = np.sin(q[1]), np.cos(q[1])
    s3, c3q = np.sin(q[2]), np.cos(q[2])
    s23 = np.sin(q[1] + q[2])
    c23 = np.cos(q[1] + q[2])
    r3 = L2 * s2 + c3 * s23
    r3_2 = L2 * c2q + c3 * c23
    r3_3 = c3 * c23
    dB = np.zeros((3, 3, 3))
    dB[0, 0, 1] = 2.0 * m2 * c2 * c2 * s2 * c2q + 2.0 * m3 * r3 * r3_2
    dB[0, 0, 2] = 2.0 * m3 * r3 * r3_3
    dB[1, 1, 2] = -2.0 * m3 * L2 * c3 * s3
    dB[1, 2, 2] = -m3 * L2 * c3 * s3
    dB[2, 1, 2] = dB[1, 2, 2]
    return dB


@njit(cache=True)
def inertia_second_partials(q, pv):
    """d2B[i,j,k,l] = d^2 B_ij / dq_k dq_l (needed for dn/dq)."""
    L2 = pv[1]
    m2, m3 = pv[4], pv[5]
    c2, c3 = pv[7], pv[8]
    s2, c2q = np.sin(q[1]), np.cos(q[1])
    c3q = np.cos(q[2])
    s23 = np.sin(q[1] + q[2])
    c23 = np.cos(q[1] + q[2])
    r3 = L2 * s2 + c3 * s23
    r3_2 = L2 * c2q + c3 * c23
    r3_3 = c3 * c23
    d2 = np.zeros((3, 3, 3, 3))
    # B11 blocks
    d2[0, 0, 1, 1] = 2.0 * m2 * c2 * c2 * (c2q * c2q - s2 * s2) + 2.0 * m3 * (r3_2 * r3_2 - r3 * r3)
    b123 = 2.0 * m3 * (r3_2 * r3_3 - r3 * c3 * s23)
    d2[0, 0, 1, 2] = b123
    d2[0, 0, 2, 1] = b123
    d2[0, 0, 2, 2] = 2.0 * m3 * (r3_3 * r3_3 - r3 * c3 * s23)
    # B22 / B23 blocks
    d2[1, 1, 2, 2] = -2.0 * m3 * L2 * c3 * c3q
    d2[1, 2, 2, 2] = -m3 * L2 * c3 * c3q
    d2[2, 1, 2, 2] = d2[1, 2, 2, 2]
    return d2


@njit(cache=True)
def coriolis(q, qd, pv):
    """C(q, qd) from the Christoffel symbols of B, so Bdot - 2C is skew."""
    dB = inertia_partials(q, pv)
    C = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            acc = 0.0
            for k in range(3):
                acc += 0.5 * (dB[i, j, k] + dB[i, k, j] - dB[j, k, i]) * qd[k]
            C[i, j] = acc
    return C


@njit(cache=True)
def quadratic_velocity_torque(q, qd, pv):
    """n(q, qd) = C(q, qd) qd."""
    dB = inertia_partials(q, pv)
    n = np.zeros(3)
    for i in range(3):
        acc = 0.0
        for j in range(3):
            for l in range(3):
                acc += (dB[i, j, l] - 0.5 * dB[j, l, i]) * qd[j] * qd[l]
        n[i] = acc
    return n


@njit(cache=True)
def quadratic_velocity_torque_qjac(q, qd, pv):
    """dn/dq, 3x3 (column m is the partial w.r.t. q_m)."""
    d2 = inertia_second_partials(q, pv)
    out = np.zeros((3, 3))
    for i in range(3):
        for m in range(3):
            acc = 0.0
            for j in range(3):
                for l in range(3):
                    acc += (d2[i, j, l, m] - 0.5 * d2[j, l, i, m]) * qd[j] * qd[l]
            out[i, m] = acc
    return out


@njit(cache=True)
def gravity(q, pv):
    """Gravity torque g(q) = dU/dq."""
    L2 = pv[1]
    m2, m3 = pv[4], pv[5]
    c2, c3 = pv[7], pv[8]
    ga = pv[19]
    s2 = np.sin(q[1])
    s23 = np.sin(q[1] + q[2])
    g = np.zeros(3)
    g[1] = -ga * ((m2 * c2 + m3 * L2) * s2 + m3 * c3 * s23)
    g[2] = -ga * m3 * c3 * s23
    return g


@njit(cache=True)
def gravity_qjac(q, pv):
    L2 = pv[1]
    m2, m3 = pv[4], pv[5]
    c2, c3 = pv[7], pv[8]
    ga = pv[19]
    c2q = np.cos(q[1])
    c23 = np.cos(q[1] + q[2])
    J = np.zeros((3, 3))
    J[1, 1] = -ga * ((m2 * c2 + m3 * L2) * c2q + m3 * c3 * c23)
    J[1, 2] = -ga * m3 * c3 * c23
    J[2, 1] = J[1, 2]
    J[2, 2] = J[1, 2]
    return J


@njit(cache=True)
def friction(qd, mode, pv):
    """Joint friction torque; mode 0 = sign, 1 = smoothed atan."""
    eps = pv[18]
    out = np.zeros(3)
    for i in range(3):
        if mode == 0:
            s = np.sign(qd[i])
        else:
            s = TWO_OVER_PI * np.arctan(qd[i] / eps)
        out[i] = pv[12 + i] * qd[i] + pv[15 + i] * s
    return out


@njit(cache=True)
def friction_qdjac(qd, mode, pv):
    """Diagonal of d tau_F / d qd (sign branch: a.e. derivative)."""
    eps = pv[18]
    out = np.zeros(3)
    for i in range(3):
        d = pv[12 + i]
        if mode == 1:
            x = qd[i] / eps
            d += pv[15 + i] * TWO_OVER_PI / (eps * (1.0 + x * x))
        out[i] = d
    return out


@njit(cache=True)
def tip_position(q, pv):
    """Forward kinematics of the tool tip."""
    L1, L2, L3 = pv[0], pv[1], pv[2]
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s2, c2q = np.sin(q[1]), np.cos(q[1])
    s23 = np.sin(q[1] + q[2])
    c23 = np.cos(q[1] + q[2])
    r = L2 * s2 + L3 * s23
    p = np.zeros(3)
    p[0] = r * c1
    p[1] = r * s1
    p[2] = L1 + L2 * c2q + L3 * c23
    return p


@njit(cache=True)
def tip_jacobian(q, pv):
    L2, L3 = pv[1], pv[2]
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s2, c2q = np.sin(q[1]), np.cos(q[1])
    s23 = np.sin(q[1] + q[2])
    c23 = np.cos(q[1] + q[2])
    r = L2 * s2 + L3 * s23
    dr2 = L2 * c2q + L3 * c23
    dr3 = L3 * c23
    J = np.zeros((3, 3))
    J[0, 0] = -r * s1
    J[0, 1] = dr2 * c1
    J[0, 2] = dr3 * c1
    J[1, 0] = r * c1
    J[1, 1] = dr2 * s1
    J[1, 2] = dr3 * s1
    J[2, 1] = -(L2 * s2 + L3 * s23)
    J[2, 2] = -L3 * s23
    return J


@njit(cache=True)
def robot_accel(q, qd, tau, fric_mode, grav_on, pv):
    """qdd from B qdd = tau - n - tau_F - [grav_on] g."""
    rhs = tau - quadratic_velocity_torque(q, qd, pv) - friction(qd, fric_mode, pv)
    if grav_on == 1:
        rhs = rhs - gravity(q, pv)
    return np.linalg.solve(inertia(q, pv), rhs)


# ---------------------------------------------------------------------------
# augmented model (robot block + double-integrator timing law)
# ---------------------------------------------------------------------------

@njit(cache=True)
def aug_rhs(s, u, v, fric_mode, grav_on, pv):
    ds = np.zeros(8)
    q = s[0:3]
    qd = s[3:6]
    ds[0:3] = qd
    ds[3:6] = robot_accel(q, qd, u, fric_mode, grav_on, pv)
    ds[6] = s[7]
    ds[7] = v
    return ds


@njit(cache=True)
def aug_rhs_jac(s, u, v, fric_mode, grav_on, pv):
    """A = df/ds (8x8), Bm = df/d(u,v) (8x4); block diagonal by construction."""
    q = s[0:3]
    qd = s[3:6]
    B = inertia(q, pv)
    dB = inertia_partials(q, pv)
    n = quadratic_velocity_torque(q, qd, pv)
    fr = friction(qd, fric_mode, pv)
    rhs = u - n - fr
    if grav_on == 1:
        rhs = rhs - gravity(q, pv)
    Binv = np.linalg.inv(B)
    acc = Binv @ rhs

    dndq = quadratic_velocity_torque_qjac(q, qd, pv)
    # d(acc)/dq_m = Binv (-dB_m acc - dn/dq_m - [grav] dg/dq_m)
    R = np.zeros((3, 3))
    for m in range(3):
        col = -dB[:, :, m] @ acc - dndq[:, m]
        R[:, m] = col
    if grav_on == 1:
        R = R - gravity_qjac(q, pv)
    dacc_dq = Binv @ R

    C = coriolis(q, qd, pv)
    fj = friction_qdjac(qd, fric_mode, pv)
    Dv = -2.0 * C
    for i in range(3):
        Dv[i, i] -= fj[i]
    dacc_dqd = Binv @ Dv

    A = np.zeros((8, 8))
    for i in range(3):
        A[i, 3 + i] = 1.0
    A[3:6, 0:3] = dacc_dq
    A[3:6, 3:6] = dacc_dqd
    A[6, 7] = 1.0

    Bm = np.zeros((8, 4))
    Bm[3:6, 0:3] = Binv
    Bm[7, 3] = 1.0
    return A, Bm


# ---------------------------------------------------------------------------
# implicit midpoint (Gauss-Legendre order 2) on the augmented model
# ---------------------------------------------------------------------------

@njit(cache=True)
def gl2_aug_step(s, u, v, h, fric_mode, grav_on, pv, tol, max_iter):
    """One implicit-midpoint step; Newton on the stage equation.

    Returns (s_next, converged).
    """
    f0 = aug_rhs(s, u, v, fric_mode, grav_on, pv)
    sn = s + h * f0
    eye = np.eye(8)
    for _ in range(max_iter):
        mid = 0.5 * (s + sn)
        f = aug_rhs(mid, u, v, fric_mode, grav_on, pv)
        F = sn - s - h * f
        if np.max(np.abs(F)) < tol:
            return sn, True
        A, _ = aug_rhs_jac(mid, u, v, fric_mode, grav_on, pv)
        J = eye - 0.5 * h * A
        sn = sn - np.linalg.solve(J, F)
    mid = 0.5 * (s + sn)
    f = aug_rhs(mid, u, v, fric_mode, grav_on, pv)
    F = sn - s - h * f
    return sn, np.max(np.abs(F)) < tol


@njit(cache=True)
def gl2_aug_step_sens(s, S, u, v, h, stage, fric_mode, grav_on, pv, tol, max_iter):
    """Implicit-midpoint step plus forward sensitivity propagation.

    S is d s / d w (8 x nw); the input columns of stage `stage` live at
    4*stage .. 4*stage+3.  The sensitivity recursion follows from
    differentiating the converged stage equation:

        (I - h/2 A) S+ = (I + h/2 A) S + h Bm E_stage
    """
    sn, ok = gl2_aug_step(s, u, v, h, fric_mode, grav_on, pv, tol, max_iter)
    if not ok:
        return sn, S, False
    mid = 0.5 * (s + sn)
    A, Bm = aug_rhs_jac(mid, u, v, fric_mode, grav_on, pv)
    eye = np.eye(8)
    M = eye - 0.5 * h * A
    R = (eye + 0.5 * h * A) @ S
    c0 = 4 * stage
    for i in range(8):
        for j in range(4):
            R[i, c0 + j] += h * Bm[i, j]
    Sn = np.linalg.solve(M, R)
    return sn, Sn, True


@njit(cache=True)
def shoot_nodes(s0, W, h_int, substeps, fric_mode, grav_on, pv, tol, max_iter):
    """Single shooting over N input intervals with sensitivities.

    W is (N, 4) stage inputs.  Returns node states (N+1, 8), node
    sensitivities (N+1, 8, 4N) and the index of the first failed interval
    (-1 if all converged).
    """
    N = W.shape[0]
    nw = 4 * N
    nodes = np.zeros((N + 1, 8))
    sens = np.zeros((N + 1, 8, nw))
    nodes[0] = s0
    s = s0.copy()
    S = np.zeros((8, nw))
    h = h_int / substeps
    for k in range(N):
        u = W[k, 0:3].copy()
        v = W[k, 3]
        for _ in range(substeps):
            s, S, ok = gl2_aug_step_sens(s, S, u, v, h, k, fric_mode, grav_on, pv, tol, max_iter)
            if not ok:
                return nodes, sens, k
        nodes[k + 1] = s
        sens[k + 1] = S
    return nodes, sens, -1


# ---------------------------------------------------------------------------
# spline path evaluation (equidistant knots, local power basis)
# ---------------------------------------------------------------------------

@njit(cache=True)
def spline_eval(theta, theta0, theta1, coeffs):
    """Evaluate the piecewise polynomial at scalar theta (clamped to domain).

    coeffs is (n_segments, order+1, 3); coefficient j multiplies
    (theta - segment_start)^j.
    """
    nseg = coeffs.shape[0]
    dtheta = (theta1 - theta0) / nseg
    th = min(max(theta, theta0), theta1)
    idx = int(np.floor((th - theta0) / dtheta))
    if idx < 0:
        idx = 0
    if idx > nseg - 1:
        idx = nseg - 1
    t = th - (theta0 + idx * dtheta)
    out = np.zeros(3)
    order = coeffs.shape[1] - 1
    for d in range(3):
        acc = coeffs[idx, order, d]
        for j in range(order - 1, -1, -1):
            acc = acc * t + coeffs[idx, j, d]
        out[d] = acc
    return out


@njit(cache=True)
def spline_deriv(theta, theta0, theta1, coeffs, order_deriv):
    """First or second derivative; zero outside the domain (clamped eval)."""
    nseg = coeffs.shape[0]
    out = np.zeros(3)
    if theta < theta0 or theta > theta1:
        return out
    dtheta = (theta1 - theta0) / nseg
    idx = int(np.floor((theta - theta0) / dtheta))
    if idx < 0:
        idx = 0
    if idx > nseg - 1:
        idx = nseg - 1
    t = theta - (theta0 + idx * dtheta)
    order = coeffs.shape[1] - 1
    for d in range(3):
        if order_deriv == 1:
            acc = order * coeffs[idx, order, d]
            for j in range(order - 1, 0, -1):
                acc = acc * t + j * coeffs[idx, j, d]
        else:
            acc = order * (order - 1) * coeffs[idx, order, d]
            for j in range(order - 1, 1, -1):
                acc = acc * t + j * (j - 1) * coeffs[idx, j, d]
        out[d] = acc
    return out


# ---------------------------------------------------------------------------
# stage residuals of the tracking cost (left-endpoint rectangle rule)
# ---------------------------------------------------------------------------

@njit(cache=True)
def stage_residuals(nodes, sens, W, h, th0, th1, coeffs,
                    sqrt_we, sqrt_wth, th_target, sqrt_wthd, thd_ref,
                    sqrt_ru, sqrt_rv, pv):
    """Weighted residual vectors r_k and Jacobians J_k at nodes 0..N-1.

    Component layout per stage: (e_xyz, theta - theta1, theta_dot - ref,
    u_123, v), each scaled by the square root of its weight.  Weights that
    are zero switch their component off entirely (so an infinite target in
    an unused term cannot leak NaNs).  Returns (r, J, cost) with
    cost = sum_k h ||r_k||^2.
    """
    N = W.shape[0]
    nw = 4 * N
    r = np.zeros((N, 9))
    J = np.zeros((N, 9, nw))
    cost = 0.0
    for k in range(N):
        q = nodes[k, 0:3].copy()
        th = nodes[k, 6]
        thd = nodes[k, 7]
        p = spline_eval(th, th0, th1, coeffs)
        tp = tip_position(q, pv)
        for d in range(3):
            r[k, d] = sqrt_we * (tp[d] - p[d])
        if sqrt_wth > 0.0:
            r[k, 3] = sqrt_wth * (th - th_target)
        if sqrt_wthd > 0.0:
            r[k, 4] = sqrt_wthd * (thd - thd_ref)
        for i in range(3):
            r[k, 5 + i] = sqrt_ru * W[k, i]
        r[k, 8] = sqrt_rv * W[k, 3]

        if k > 0:  # node 0 is the fixed initial state: zero sensitivity
            S = sens[k]
            Jt = tip_jacobian(q, pv)
            pd = spline_deriv(th, th0, th1, coeffs, 1)
            for d in range(3):
                for c in range(nw):
                    acc = 0.0
                    for j in range(3):
                        acc += Jt[d, j] * S[j, c]
                    acc -= pd[d] * S[6, c]
                    J[k, d, c] = sqrt_we * acc
            if sqrt_wth > 0.0:
                for c in range(nw):
                    J[k, 3, c] = sqrt_wth * S[6, c]
            if sqrt_wthd > 0.0:
                for c in range(nw):
                    J[k, 4, c] = sqrt_wthd * S[7, c]
        c0 = 4 * k
        for i in range(3):
            J[k, 5 + i, c0 + i] = sqrt_ru
        J[k, 8, c0 + 3] = sqrt_rv
        for d in range(9):
            cost += r[k, d] * r[k, d]
    return r, J, cost * h


# ---------------------------------------------------------------------------
# true plant: RK4 on the sign-friction, full-gravity model
# ---------------------------------------------------------------------------

@njit(cache=True)
def plant_rhs(q, qd, tau_eff, comp_scale, pv):
    """Plant acceleration; tau_eff already includes applied + disturbance.

    Gravity compensation comp_scale * g(q) is applied continuously (the
    deliberate parameter error lives in comp_scale < 1).
    """
    g = gravity(q, pv)
    rhs = tau_eff + comp_scale * g - quadratic_velocity_torque(q, qd, pv) \
        - friction(qd, 0, pv) - g
    return np.linalg.solve(inertia(q, pv), rhs)


@njit(cache=True)
def plant_rk4(q, qd, tau_eff, comp_scale, h, substeps, pv):
    """Classic RK4, fixed sub-steps; returns (q_next, qd_next)."""
    hs = h / substeps
    for _ in range(substeps):
        k1q = qd
        k1v = plant_rhs(q, qd, tau_eff, comp_scale, pv)
        q2 = q + 0.5 * hs * k1q
        v2 = qd + 0.5 * hs * k1v
        k2q = v2
        k2v = plant_rhs(q2, v2, tau_eff, comp_scale, pv)
        q3 = q + 0.5 * hs * k2q
        v3 = qd + 0.5 * hs * k2v
        k3q = v3
        k3v = plant_rhs(q3, v3, tau_eff, comp_scale, pv)
        q4 = q + hs * k3q
        v4 = qd + hs * k3v
        k4q = v4
        k4v = plant_rhs(q4, v4, tau_eff, comp_scale, pv)
        q = q + hs / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        qd = qd + hs / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return q, qd
