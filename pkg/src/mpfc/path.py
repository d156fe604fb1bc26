"""Geometric path in tip space: piecewise-polynomial spline in theta.

The path p: [theta0, theta1] -> R^3 is stored as per-segment polynomials on
an equidistant knot partition.  Evaluation uses the sum-over-segments
selector semantics (each theta belongs to exactly one half-open segment
[knot_i, knot_{i+1}); the last segment also owns its right endpoint) with
coefficients in the local power basis (theta - segment_start)^j, which
stays well conditioned for the large theta ranges used here.  Outside the
domain the path extends as a constant (clamped to the endpoint values), so
derivatives vanish there.

Fitting interpolates waypoints on equidistant knots with a natural cubic
spline (C2, zero second derivative at both ends).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import _kernels as _k

Array = np.ndarray

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SplinePath:
    """Piecewise polynomial path.

    coeffs has shape (n_segments, order+1, 3); coeffs[i, j, d] multiplies
    (theta - knot_i)^j in output dimension d.
    """

    theta0: float
    theta1: float
    coeffs: Array

    def __post_init__(self):
        if not self.theta1 > self.theta0:
            raise ValueError("theta1 must exceed theta0")
        c = np.ascontiguousarray(self.coeffs, dtype=float)
        if c.ndim != 3 or c.shape[2] != 3 or c.shape[0] < 1:
            raise ValueError("coeffs must have shape (n_segments, order+1, 3)")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_segments(self) -> int:
        return self.coeffs.shape[0]

    @property
    def knots(self) -> Array:
        return np.linspace(self.theta0, self.theta1, self.n_segments + 1)


def load_waypoints(file) -> Array:
    """Read a waypoint file: one 'x y z' line per point, '#' comments."""
    pts = []
    with open(file) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 3:
                raise ValueError(f"expected 3 fields per waypoint, got {line!r}")
            pts.append([float(x) for x in fields])
    if not pts:
        raise ValueError("waypoint file contains no points")
    return np.asarray(pts, dtype=float)


def save_waypoints(file, points: Array, comment: str | None = None) -> None:
    points = np.asarray(points, dtype=float)
    with open(file, "w") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        for p in points:
            fh.write("%.9g %.9g %.9g\n" % (p[0], p[1], p[2]))


def fit_waypoints(points: Array, theta0: float, theta1: float) -> SplinePath:
    """Natural cubic spline through waypoints on equidistant knots.

    Consecutive duplicate waypoints (gap < 1e-9) are rejected; they would
    make the interpolation problem ill-posed.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError("points must have shape (n, 3)")
    n = points.shape[0]
    if n < 2:
        raise ValueError("need at least two waypoints")
    gaps = np.linalg.norm(np.diff(points, axis=0), axis=1)
    if np.any(gaps < 1e-9):
        raise ValueError("consecutive duplicate waypoints")
    knots = np.linspace(theta0, theta1, n)
    if n == 2:
        # natural end conditions leave a straight segment
        coeffs = np.zeros((1, 4, 3))
        coeffs[0, 0] = points[0]
        coeffs[0, 1] = (points[1] - points[0]) / (knots[1] - knots[0])
        return SplinePath(theta0, theta1, coeffs)
    cs = CubicSpline(knots, points, axis=0, bc_type="natural")
    # cs.c[m, i, d] multiplies (theta - knot_i)^(3-m)
    coeffs = np.transpose(cs.c[::-1], (1, 0, 2))
    return SplinePath(theta0, theta1, np.ascontiguousarray(coeffs))


def eval_path(path: SplinePath, theta) -> Array:
    """p(theta); scalar theta gives (3,), array theta gives (n, 3).

    Clamped to the endpoint values outside [theta0, theta1].
    """
    th = np.asarray(theta, dtype=float)
    if th.ndim == 0:
        return _k.spline_eval(float(th), path.theta0, path.theta1, path.coeffs)
    flat = th.ravel()
    out = np.empty((flat.size, 3))
    nseg = path.n_segments
    dtheta = (path.theta1 - path.theta0) / nseg
    thc = np.clip(flat, path.theta0, path.theta1)
    idx = np.clip(((thc - path.theta0) / dtheta).astype(np.int64), 0, nseg - 1)
    t = thc - (path.theta0 + idx * dtheta)
    c = path.coeffs
    order = c.shape[1] - 1
    acc = c[idx, order, :]
    for j in range(order - 1, -1, -1):
        acc = acc * t[:, None] + c[idx, j, :]
    out[:] = acc
    return out.reshape(th.shape + (3,))


def eval_deriv(path: SplinePath, theta: float, order: int = 1) -> Array:
    """d^order p / d theta^order (order 1 or 2); zero outside the domain."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    return _k.spline_deriv(float(theta), path.theta0, path.theta1, path.coeffs, order)


def project(path: SplinePath, point: Array, theta_hint: float,
            n_grid: int | None = None) -> float:
    """theta locally minimizing ||point - p(theta)||, clamped to the domain.

    A coarse grid over the domain locates the best cell (ties resolve to
    the lowest theta, so a hint at the start of a self-intersecting path
    picks the first visit); golden-section search then refines to
    |dtheta| < 1e-6 (theta1 - theta0).
    """
    point = np.asarray(point, dtype=float)
    if n_grid is None:
        n_grid = min(max(512, 4 * path.n_segments), 20000)
    grid = np.linspace(path.theta0, path.theta1, n_grid + 1)
    d2 = np.sum((eval_path(path, grid) - point) ** 2, axis=1)
    i = int(np.argmin(d2))
    # prefer the hint's cell when it is just as good (within roundoff)
    ih = int(np.argmin(np.abs(grid - theta_hint)))
    if d2[ih] <= d2[i] * (1.0 + 1e-12):
        i = ih
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, n_grid)]
    tol = 1e-6 * (path.theta1 - path.theta0)

    def dist2(th):
        r = _k.spline_eval(th, path.theta0, path.theta1, path.coeffs) - point
        return r @ r

    a, b = lo, hi
    c1 = b - _GOLDEN * (b - a)
    c2 = a + _GOLDEN * (b - a)
    f1, f2 = dist2(c1), dist2(c2)
    while (b - a) > tol:
        if f1 <= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - _GOLDEN * (b - a)
            f1 = dist2(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + _GOLDEN * (b - a)
            f2 = dist2(c2)
    return float(0.5 * (a + b))
