"""Scenario configuration, closed-loop simulation, logging and metrics.

A scenario file is flat key-value text with sections (configparser
syntax).  Keys mirror the controller parameter names: w_e, w_theta,
w_thetadot, r_u, r_v, tau_bar, qdot_bar, theta1, thetadot_ref, V_lo,
V_hi.  Vector values are whitespace-separated.  The waypoint file is
resolved relative to the scenario file.  See data/clover.cfg for a fully
commented example.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .augmented import path_error
from .controller import ControllerState, control_step, init_controller
from .dynamics import CONTROLLER_VARIANT, JointState, ModelVariant, RobotParams
from .ocp import OcpConfig
from .path import SplinePath, fit_waypoints, load_waypoints
from .plant import DisturbanceProfile, VelocityEstimator, estimate_velocity, plant_step

Array = np.ndarray

DATA_DIR = Path(__file__).resolve().parent / "data"

LOG_COLUMNS = (
    "t", "q1", "q2", "q3", "qd1", "qd2", "qd3",
    "qd1_est", "qd2_est", "qd3_est", "u1", "u2", "u3",
    "theta", "theta_dot", "v", "e1", "e2", "e3", "e_norm",
    "cost", "solve_ms", "fault",
)


@dataclass
class ClosedLoopLog:
    """Per-sample closed-loop record; one row per controller period."""

    data: Array  # (n_samples, len(LOG_COLUMNS))

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != len(LOG_COLUMNS):
            raise ValueError(f"log data must have {len(LOG_COLUMNS)} columns")

    def __len__(self):
        return self.data.shape[0]

    def col(self, name: str) -> Array:
        return self.data[:, LOG_COLUMNS.index(name)]

    @property
    def t(self):
        return self.col("t")

    @property
    def q(self):
        return self.data[:, 1:4]

    @property
    def qd(self):
        return self.data[:, 4:7]

    @property
    def qd_est(self):
        return self.data[:, 7:10]

    @property
    def u(self):
        return self.data[:, 10:13]

    @property
    def theta(self):
        return self.col("theta")

    @property
    def theta_dot(self):
        return self.col("theta_dot")

    @property
    def e(self):
        return self.data[:, 16:19]

    @property
    def e_norm(self):
        return self.col("e_norm")

    @property
    def solve_ms(self):
        return self.col("solve_ms")

    @property
    def fault(self):
        return self.col("fault")

    def to_csv(self, file) -> None:
        np.savetxt(file, self.data, delimiter=",", comments="",
                   header=",".join(LOG_COLUMNS), fmt="%.9g")

    @staticmethod
    def from_csv(file) -> "ClosedLoopLog":
        data = np.loadtxt(file, delimiter=",", skiprows=1, ndmin=2)
        return ClosedLoopLog(data)


@dataclass
class Scenario:
    """Everything needed to run one closed-loop experiment."""

    name: str
    mode: str
    duration: float
    delta: float
    x0: JointState
    params: RobotParams
    cfg: OcpConfig
    path: SplinePath
    disturbances: DisturbanceProfile = field(default_factory=DisturbanceProfile)
    gravity_comp_error: float = 0.02
    filter_cutoff: float = 50.0
    plant_substeps: int = 4
    controller_variant: ModelVariant = CONTROLLER_VARIANT

    @property
    def n_samples(self) -> int:
        return int(round(self.duration / self.delta))


def _vec(s: str) -> Array:
    return np.array([float(x) for x in s.split()])


def scenario_file(name: str) -> Path:
    """Resolve a scenario argument: a file path or a built-in name."""
    p = Path(name)
    if p.exists():
        return p
    builtin = DATA_DIR / f"{name}.cfg"
    if builtin.exists():
        return builtin
    raise FileNotFoundError(f"no scenario file or built-in scenario {name!r}")


def load_scenario(file) -> Scenario:
    """Parse a scenario file into a ready-to-run Scenario."""
    file = Path(file)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    with open(file) as fh:
        cp.read_file(fh)

    sec = cp["scenario"]
    name = sec.get("name", file.stem)
    mode = sec.get("mode")
    duration = sec.getfloat("duration")
    delta = sec.getfloat("delta", 1e-3)
    q0 = _vec(sec.get("q0"))
    qd0 = _vec(sec.get("qdot0", "0 0 0"))

    rb = cp["robot"]
    params = RobotParams(
        link_lengths=_vec(rb.get("link_lengths")),
        link_masses=_vec(rb.get("link_masses")),
        link_com_offsets=_vec(rb.get("link_com_offsets")),
        link_inertias=_vec(rb.get("link_inertias")),
        viscous_friction=_vec(rb.get("viscous_friction")),
        coulomb_friction=_vec(rb.get("coulomb_friction")),
        coulomb_smoothing=rb.getfloat("coulomb_smoothing", 0.05),
        gravity_accel=rb.getfloat("gravity_accel", 9.81),
    )

    pa = cp["path"]
    theta0 = pa.getfloat("theta0", 0.0)
    theta1 = pa.getfloat("theta1")
    wp_file = file.parent / pa.get("waypoints")
    path = fit_waypoints(load_waypoints(wp_file), theta0, theta1)

    oc = cp["ocp"]
    cfg = OcpConfig(
        mode=mode,
        horizon=oc.getfloat("horizon", 0.1),
        n_intervals=oc.getint("intervals", 10),
        integrator_steps=oc.getint("integrator_steps", 1),
        w_e=oc.getfloat("w_e"),
        w_theta=oc.getfloat("w_theta", 0.0),
        w_thetadot=oc.getfloat("w_thetadot", 0.0),
        r_u=oc.getfloat("r_u"),
        r_v=oc.getfloat("r_v"),
        theta0=theta0,
        theta1=oc.getfloat("theta1", np.inf),
        thetadot_ref=oc.getfloat("thetadot_ref", 0.0),
        tau_max=oc.getfloat("tau_bar"),
        qdot_max=oc.getfloat("qdot_bar"),
        v_lo=oc.getfloat("V_lo", -1e4),
        v_hi=oc.getfloat("V_hi", 8e3),
    )

    windows = []
    if cp.has_section("disturbances"):
        raw = cp["disturbances"].get("windows", "").strip()
        for line in raw.splitlines():
            fields = [float(x) for x in line.split()]
            if not fields:
                continue
            if len(fields) != 5:
                raise ValueError("disturbance window needs: t_start t_end tau1 tau2 tau3")
            windows.append((fields[0], fields[1], np.array(fields[2:5])))

    pl = cp["plant"] if cp.has_section("plant") else {}
    get = (lambda key, d: float(pl.get(key, d))) if pl else (lambda key, d: d)

    return Scenario(
        name=name, mode=mode, duration=duration, delta=delta,
        x0=JointState(q0, qd0), params=params, cfg=cfg, path=path,
        disturbances=DisturbanceProfile(tuple(windows)),
        gravity_comp_error=get("gravity_comp_error", 0.02),
        filter_cutoff=get("filter_cutoff", 50.0),
        plant_substeps=int(get("substeps", 4)),
    )


def run_scenario(sc: Scenario, collect_timing: bool = True) -> ClosedLoopLog:
    """Run the closed loop: estimator -> controller -> plant, once per ms.

    With collect_timing=False the solve_ms column is written as zero,
    making the whole log a deterministic function of the scenario.
    """
    n = sc.n_samples
    rows = np.empty((n, len(LOG_COLUMNS)))
    state = sc.x0
    est = VelocityEstimator(cutoff_hz=sc.filter_cutoff, q_prev=state.q)
    cs = init_controller(state, sc.path, sc.cfg, sc.params)
    q_prev = state.q.copy()

    for k in range(n):
        t = k * sc.delta
        qd_est = estimate_velocity(est, state.q, q_prev, sc.delta)
        q_prev = state.q.copy()
        u, cs, diag = control_step(cs, JointState(state.q, qd_est), t,
                                   sc.cfg, sc.path, sc.params,
                                   sc.controller_variant)
        e = path_error(state.q, cs.z.theta, sc.path, sc.params)
        rows[k, 0] = t
        rows[k, 1:4] = state.q
        rows[k, 4:7] = state.qd
        rows[k, 7:10] = qd_est
        rows[k, 10:13] = u
        rows[k, 13] = cs.z.theta
        rows[k, 14] = cs.z.theta_dot
        rows[k, 15] = cs.w[3]
        rows[k, 16:19] = e
        rows[k, 19] = np.linalg.norm(e)
        rows[k, 20] = diag.cost
        rows[k, 21] = diag.wall_time * 1e3 if collect_timing else 0.0
        rows[k, 22] = float(diag.fault)

        d = sc.disturbances.torque_at(t)
        state = plant_step(state, u, d, sc.delta, sc.params,
                           sc.gravity_comp_error, sc.plant_substeps)
    return ClosedLoopLog(rows)


def compute_metrics(log: ClosedLoopLog, settle_time: float,
                    tau_max: float | None = None,
                    qdot_max: float | None = None) -> dict:
    """Summary statistics of a closed-loop log after a settle period."""
    t = log.t
    settled = t >= settle_time
    if not np.any(settled):
        raise ValueError("settle_time leaves no samples")
    e = log.e_norm
    out = {
        "n_samples": int(len(log)),
        "duration": float(t[-1] + (t[1] - t[0] if len(log) > 1 else 0.0)),
        "settle_time": float(settle_time),
        "max_err_settled": float(np.max(e[settled])),
        "mean_err_settled": float(np.mean(e[settled])),
        "max_err_overall": float(np.max(e)),
        "theta_end": float(log.theta[-1]),
        "thetadot_mean_settled": float(np.mean(log.theta_dot[settled])),
        "thetadot_min": float(np.min(log.theta_dot)),
        "fault_count": int(np.sum(log.fault)),
        "solve_ms_mean": float(np.mean(log.solve_ms)),
        "solve_ms_max": float(np.max(log.solve_ms)),
        "solve_ms_median": float(np.median(log.solve_ms)),
    }
    if tau_max is not None:
        u_inf = np.max(np.abs(log.u), axis=1)
        out["tau_violations"] = int(np.sum(u_inf > tau_max))
    if qdot_max is not None:
        qd_inf = np.max(np.abs(log.qd), axis=1)
        out["qdot_exceed_frac"] = float(np.mean(qd_inf > qdot_max))
        out["qdot_max_over_frac"] = float(max(np.max(qd_inf) / qdot_max - 1.0, 0.0))
    return out
