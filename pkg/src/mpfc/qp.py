"""Dense primal active-set solver for the small RTI quadratic programs.

    minimize   1/2 x' H x + g' x
    subject to A x <= b,   lb <= x <= ub

H must be positive definite (the Gauss-Newton Hessian is regularized
before it gets here).  Box bounds are folded into the inequality rows, so
one working set covers everything.  Each iteration solves the
equality-constrained subproblem through its KKT system; ties in the ratio
test and the multiplier test break toward the lowest row index
(Bland-style anti-cycling).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Array = np.ndarray

_FEAS_TOL = 1e-10
_LAM_TOL = 1e-9
_STEP_TOL = 1e-12


class MaxIterations(RuntimeError):
    """Active-set loop exceeded the iteration budget."""


class Infeasible(RuntimeError):
    """No point satisfies all constraints (should not occur in closed loop)."""


@dataclass
class QpResult:
    x: Array
    iterations: int
    active: list = field(default_factory=list)
    stationarity: float = 0.0
    feasibility: float = 0.0
    complementarity: float = 0.0


def _find_feasible(x, rows, rhs, max_passes=500):
    """Cyclic projection onto the half-spaces; returns a feasible point."""
    for _ in range(max_passes):
        viol = rows @ x - rhs
        worst = np.max(viol)
        if worst <= _FEAS_TOL:
            return x
        for i in np.nonzero(viol > _FEAS_TOL)[0]:
            a = rows[i]
            v = a @ x - rhs[i]
            if v > 0.0:
                x = x - a * (v / (a @ a))
    raise Infeasible("phase-1 projection did not reach a feasible point")


def solve_qp(H: Array, g: Array, A: Array | None, b: Array | None,
             lb: Array, ub: Array, max_iter: int | None = None) -> QpResult:
    """Solve the box-and-rows QP; see module docstring.

    Raises MaxIterations when the working-set loop stalls and Infeasible
    when phase 1 cannot produce a feasible start.
    """
    n = g.size
    if A is None or len(A) == 0:
        rows = np.zeros((0, n))
        rhs = np.zeros(0)
    else:
        rows = np.asarray(A, dtype=float)
        rhs = np.asarray(b, dtype=float)
    eye = np.eye(n)
    rows = np.vstack([rows, eye, -eye])
    rhs = np.concatenate([rhs, ub, -lb])
    m = rows.shape[0]
    if max_iter is None:
        max_iter = 20 * (n + m)

    x = np.zeros(n)
    if np.max(rows @ x - rhs) > _FEAS_TOL:
        x = _find_feasible(x, rows, rhs)

    work: list[int] = []
    lam_full = np.zeros(m)
    for it in range(1, max_iter + 1):
        grad = H @ x + g
        k = len(work)
        if k == 0:
            try:
                d = np.linalg.solve(H, -grad)
            except np.linalg.LinAlgError:
                raise MaxIterations("singular KKT system")
            lam = np.zeros(0)
        else:
            Aw = rows[work]
            kkt = np.zeros((n + k, n + k))
            kkt[:n, :n] = H
            kkt[:n, n:] = Aw.T
            kkt[n:, :n] = Aw
            rhs_kkt = np.concatenate([-grad, np.zeros(k)])
            try:
                sol = np.linalg.solve(kkt, rhs_kkt)
            except np.linalg.LinAlgError:
                raise MaxIterations("singular KKT system")
            d = sol[:n]
            lam = sol[n:]

        if np.max(np.abs(d)) <= _STEP_TOL * (1.0 + np.max(np.abs(x))):
            # stationary on the working set: check multipliers
            neg = [i for i, li in zip(work, lam) if li < -_LAM_TOL]
            if not neg:
                lam_full[:] = 0.0
                for i, li in zip(work, lam):
                    lam_full[i] = li
                res = grad + rows[work].T @ lam if work else grad
                slack = rows @ x - rhs
                return QpResult(
                    x=x,
                    iterations=it,
                    active=sorted(work),
                    stationarity=float(np.max(np.abs(res))),
                    feasibility=float(max(np.max(slack), 0.0)),
                    complementarity=float(np.max(np.abs(lam_full * slack))) if m else 0.0,
                )
            work.remove(min(neg))
            continue

        # ratio test against rows not in the working set
        alpha = 1.0
        blocker = -1
        ax = rows @ x
        ad = rows @ d
        for i in range(m):
            if i in work or ad[i] <= 1e-14:
                continue
            ai = (rhs[i] - ax[i]) / ad[i]
            if ai < alpha - 1e-12:
                alpha = ai
                blocker = i
            elif blocker >= 0 and ai < alpha + 1e-12 and i < blocker:
                blocker = i
        if alpha > 0.0:
            x = x + alpha * d
        if blocker >= 0:
            work.append(blocker)
            work.sort()
    raise MaxIterations(f"no convergence in {max_iter} active-set iterations")
