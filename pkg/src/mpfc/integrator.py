"""Implicit Gauss-Legendre order 2 (implicit midpoint) integrator.

One step solves the stage equation

    x+ = x + h f((x + x+)/2, u)

by Newton iteration.  The scheme is symplectic, A-stable and second order;
for linear dynamics a single Newton step is exact.  Sensitivity propagation
differentiates the converged stage equation, giving

    (I - h/2 A) S+ = (I + h/2 A) S + h B dU

with A, B the rhs Jacobians at the midpoint.

The generic functions below accept arbitrary rhs callables (used by the
tests and small studies); the OCP hot path uses the compiled specialization
in :mod:`mpfc._kernels`, which implements the same recursion.
"""

from __future__ import annotations

import numpy as np

Array = np.ndarray


class NonConvergence(RuntimeError):
    """Newton iteration on the stage equation failed to reach tolerance."""


def _fd_jacobian(rhs, x: Array, u, f0: Array) -> Array:
    n = x.size
    J = np.empty((n, n))
    for j in range(n):
        h = 1e-7 * (1.0 + abs(x[j]))
        xp = x.copy()
        xp[j] += h
        J[:, j] = (rhs(xp, u) - f0) / h
    return J


def gl2_step(rhs, state: Array, u, h: float, tol: float = 1e-12,
             max_iter: int = 20, rhs_jac=None) -> Array:
    """One implicit-midpoint step of ``d state/dt = rhs(state, u)``.

    Parameters
    ----------
    rhs : callable(state, u) -> derivative
    rhs_jac : optional callable(state, u) -> (A, B); when absent the Newton
        matrix uses a forward-difference Jacobian (the converged solution is
        unaffected, only the iteration path).

    Raises
    ------
    NonConvergence
        if the stage residual does not drop below `tol` in `max_iter` steps.
    """
    state = np.asarray(state, dtype=float)
    xn = state + h * np.asarray(rhs(state, u), dtype=float)
    eye = np.eye(state.size)
    for _ in range(max_iter):
        mid = 0.5 * (state + xn)
        f = np.asarray(rhs(mid, u), dtype=float)
        F = xn - state - h * f
        if np.max(np.abs(F)) < tol:
            return xn
        if rhs_jac is not None:
            A = np.asarray(rhs_jac(mid, u)[0], dtype=float)
        else:
            A = _fd_jacobian(rhs, mid, u, f)
        xn = xn - np.linalg.solve(eye - 0.5 * h * A, F)
    mid = 0.5 * (state + xn)
    F = xn - state - h * np.asarray(rhs(mid, u), dtype=float)
    if np.max(np.abs(F)) < tol:
        return xn
    raise NonConvergence(f"stage residual {np.max(np.abs(F)):.3e} after {max_iter} iterations")


def gl2_step_with_sensitivity(rhs, rhs_jac, state: Array, state_sens: Array,
                              u, input_sens: Array, h: float,
                              tol: float = 1e-12, max_iter: int = 20):
    """Implicit-midpoint step plus forward sensitivities.

    state_sens is d state / d w (n x nw), input_sens is d u / d w (nu x nw).
    Returns (next_state, next_sens).
    """
    state = np.asarray(state, dtype=float)
    xn = gl2_step(rhs, state, u, h, tol=tol, max_iter=max_iter, rhs_jac=rhs_jac)
    mid = 0.5 * (state + xn)
    A, B = rhs_jac(mid, u)
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    eye = np.eye(state.size)
    R = (eye + 0.5 * h * A) @ state_sens + h * (B @ input_sens)
    Sn = np.linalg.solve(eye - 0.5 * h * A, R)
    return xn, Sn


def rk4_step(rhs, state: Array, u, h: float) -> Array:
    """Classic explicit RK4 step (used by the plant simulation)."""
    state = np.asarray(state, dtype=float)
    k1 = np.asarray(rhs(state, u), dtype=float)
    k2 = np.asarray(rhs(state + 0.5 * h * k1, u), dtype=float)
    k3 = np.asarray(rhs(state + 0.5 * h * k2, u), dtype=float)
    k4 = np.asarray(rhs(state + h * k3, u), dtype=float)
    return state + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
