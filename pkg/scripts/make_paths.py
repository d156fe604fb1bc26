#!/usr/bin/env python3
"""Generate the built-in waypoint files and print IK joint angles.

Both paths live on a vertical "board" plane x = BOARD_X in front of the
arm.  The clover is a three-petal rose traced three times, sampled
uniformly in the polar angle so the tip speed demanded per unit of theta
varies ~3:1 over a petal (fastest at the centre crossings).  The hello
glyph is a single connected cursive stroke, resampled uniformly in arc
length.

Run from the repository root:  python3 scripts/make_paths.py
"""

import sys
from pathlib import Path

import numpy as np
from scipy.interpolate import splev, splprep

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mpfc.dynamics import RobotParams, forward_kinematics  # noqa: E402
from mpfc.path import save_waypoints  # noqa: E402

BOARD_X = 0.55
DATA = Path(__file__).resolve().parents[1] / "src" / "mpfc" / "data"


def clover_waypoints(amplitude=0.18, turns=3, units_per_turn=900,
                     center_z=0.55):
    """Rose r = A cos(3 phi), phi in [0, turns*pi], one waypoint per theta unit."""
    n = turns * units_per_turn
    theta = np.arange(n + 1)
    phi = theta * (turns * np.pi) / n
    r = amplitude * np.cos(3.0 * phi)
    y = r * np.cos(phi)
    z = center_z + r * np.sin(phi)
    x = np.full_like(y, BOARD_X)
    return np.column_stack([x, y, z])


# Control polygon of a one-stroke cursive "Hello" in glyph coordinates:
# w across the board, v up from the baseline.  Turnarounds are drawn as
# small loops so the interpolated curve stays smooth.
_HELLO_POINTS = [
    # H: left stem down, bottom curl, rising diagonal, top loop, right
    # stem down, exit curl
    (0.030, 0.185), (0.022, 0.130), (0.018, 0.070), (0.022, 0.028),
    (0.038, 0.016), (0.052, 0.030), (0.060, 0.060),
    (0.078, 0.110), (0.100, 0.160), (0.114, 0.186),
    (0.128, 0.194), (0.136, 0.180), (0.133, 0.150),
    (0.129, 0.100), (0.128, 0.050), (0.132, 0.020),
    (0.148, 0.012), (0.162, 0.024), (0.170, 0.046),
    # e: small loop
    (0.182, 0.070), (0.196, 0.092), (0.205, 0.078), (0.202, 0.050),
    (0.190, 0.022), (0.172, 0.012), (0.200, 0.010), (0.222, 0.024),
    # l: tall loop, down-stroke, bottom curl
    (0.244, 0.060), (0.272, 0.130), (0.290, 0.185), (0.287, 0.208),
    (0.272, 0.196), (0.266, 0.150), (0.264, 0.090), (0.266, 0.038),
    (0.278, 0.012), (0.296, 0.020), (0.308, 0.046),
    # l again
    (0.330, 0.086), (0.356, 0.150), (0.372, 0.192), (0.370, 0.210),
    (0.356, 0.198), (0.349, 0.150), (0.346, 0.090), (0.348, 0.038),
    (0.360, 0.012), (0.378, 0.020), (0.390, 0.046),
    # o: oval with a top exit tail
    (0.404, 0.072), (0.412, 0.096), (0.404, 0.110), (0.390, 0.098),
    (0.384, 0.066), (0.390, 0.030), (0.408, 0.014), (0.428, 0.026),
    (0.438, 0.056), (0.440, 0.086), (0.452, 0.100), (0.470, 0.104),
]


def hello_waypoints(n_intervals=1800, width=0.66, base_z=0.460):
    """Arc-length-uniform resampling of the cursive stroke."""
    pts = np.array(_HELLO_POINTS)
    scale = width / 0.47  # glyph coordinates span ~0.47 across
    w = (pts[:, 0] - 0.245) * scale  # centre the word on y = 0
    v = pts[:, 1] * scale
    tck, _ = splprep([w, v], s=0.0, k=3)
    s_dense = np.linspace(0.0, 1.0, 20001)
    wd, vd = splev(s_dense, tck)
    seg = np.hypot(np.diff(wd), np.diff(vd))
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    total = arc[-1]
    s_uniform = np.interp(np.linspace(0.0, total, n_intervals + 1), arc, s_dense)
    wu, vu = splev(s_uniform, tck)
    out = np.column_stack([np.full(n_intervals + 1, BOARD_X), wu, base_z + vu])
    return out, total


def board_ik(target, params):
    """Joint angles putting the tip at a board point; elbow bent outward."""
    x, y, z = target
    q1 = np.arctan2(y, x)
    rho = np.hypot(x, y)
    dz = z - params.link_lengths[0]
    L2, L3 = params.link_lengths[1], params.link_lengths[2]
    d2 = rho * rho + dz * dz
    c3 = (d2 - L2 * L2 - L3 * L3) / (2.0 * L2 * L3)
    if abs(c3) > 1.0:
        raise ValueError(f"target {target} out of reach")
    q3 = np.arccos(c3)
    # angle of the target from vertical, minus the elbow correction
    q2 = np.arctan2(rho, dz) - np.arctan2(L3 * np.sin(q3), L2 + L3 * np.cos(q3))
    q = np.array([q1, q2, q3])
    err = np.linalg.norm(forward_kinematics(q, params) - np.asarray(target))
    if err > 1e-10:
        raise RuntimeError(f"IK residual {err:.2e} for target {target}")
    return q


def main():
    params = RobotParams()
    DATA.mkdir(exist_ok=True)

    clover = clover_waypoints()
    save_waypoints(DATA / "clover_waypoints.txt", clover,
                   comment="clover: three-petal rose traced three times, "
                          "one waypoint per theta unit")
    q0 = board_ik(clover[0], params)
    seg = np.linalg.norm(np.diff(clover, axis=0), axis=1)
    print(f"clover: {len(clover)} waypoints, arc {seg.sum():.4f} m, "
          f"|p'| in [{seg.min():.3e}, {seg.max():.3e}] m/unit")
    print(f"clover q0 = {q0[0]:.9f} {q0[1]:.9f} {q0[2]:.9f}")

    hello, total = hello_waypoints()
    save_waypoints(DATA / "hello_waypoints.txt", hello,
                   comment="hello: one-stroke cursive glyph, uniform arc length")
    q0h = board_ik(hello[0], params)
    print(f"hello: {len(hello)} waypoints, arc {total:.4f} m, "
          f"{total / 1750.0:.3e} m/unit")
    print(f"hello q0 = {q0h[0]:.9f} {q0h[1]:.9f} {q0h[2]:.9f}")

    # reachability check across both paths
    for name, wp in (("clover", clover), ("hello", hello)):
        for row in wp[:: max(1, len(wp) // 200)]:
            board_ik(row, params)
        print(f"{name}: all sampled waypoints reachable")


if __name__ == "__main__":
    main()
