"""Closed-loop scenario execution, logging, and metric extraction.

A scenario steps the nonlinear plant with fixed-step RK4 under one of three
controllers (the H-infinity inner loop with the PD outer loop, a PID
attitude baseline, or open loop at trim), logs every step, and reduces the
log to hover-precision metrics.  Runs are deterministic given the scenario
configuration and seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import _state_derivative_flat
from .errors import ConfigError, SimulationAbort
from .hinf import SynthesisResult, control_law
from .observer import (
    ObserverDesign,
    assemble_state_estimate,
    observer_init,
    observer_step,
)
from .outer import OuterGains, PositionReference, altitude_control, horizontal_control
from .params import HelicopterParams
from .state import (
    ControlInputs,
    FullState,
    NedPosition,
    SAT_DCOL,
    SAT_FLAP,
    SAT_GYRO,
    SAT_TILT,
    STATE_LABELS,
    N_STATES,
)
from .trim import TrimPoint
from .wind import WindModel

SETTLE_WINDOW = 2.0  # seconds excluded after each reference or wind event

LOG_COLUMNS = ("t," + ",".join(STATE_LABELS)
               + ",dlat,dlon,dped,dcol,wind_u,wind_v,wind_w"
               + ",phi_ref,theta_ref,psi_ref,est_a_s,est_b_s,est_dped,sat_flags")


def rk4_step(derivative, state: np.ndarray, inputs: np.ndarray,
             wind: np.ndarray, dt: float) -> np.ndarray:
    """Classical fourth-order Runge-Kutta step with inputs and wind held."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    k1 = derivative(state, inputs, wind)
    k2 = derivative(state + 0.5 * dt * k1, inputs, wind)
    k3 = derivative(state + 0.5 * dt * k2, inputs, wind)
    k4 = derivative(state + dt * k3, inputs, wind)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass
class PidGains:
    roll_kp: float = 0.14
    roll_ki: float = 0.15
    roll_kd: float = 0.05
    pitch_kp: float = 0.35
    pitch_ki: float = 0.25
    pitch_kd: float = 0.13
    yaw_kp: float = 0.80
    yaw_ki: float = 0.30
    int_limit: float = 0.35


class PidAttitudeController:
    """Independent per-axis PID on roll/pitch plus PI on heading.

    Derivative action uses the measured body rates; integrators are clamped
    as anti-windup.  Outputs are deviations added to the trim inputs and
    clamped to the servo range.
    """

    def __init__(self, gains: PidGains, trim: TrimPoint):
        self.gains = gains
        self.trim = trim
        self.reset()

    def reset(self):
        self.int_roll = 0.0
        self.int_pitch = 0.0
        self.int_yaw = 0.0

    def step(self, state: FullState, att_ref: np.ndarray, dt: float
             ) -> tuple[float, float, float]:
        g = self.gains
        att, rates = state.attitude, state.rates
        e_phi = att_ref[0] - att.phi
        e_theta = att_ref[1] - att.theta
        e_psi = att_ref[2] - att.psi

        lim = g.int_limit
        self.int_roll = min(max(self.int_roll + e_phi * dt, -lim), lim)
        self.int_pitch = min(max(self.int_pitch + e_theta * dt, -lim), lim)
        self.int_yaw = min(max(self.int_yaw + e_psi * dt, -lim), lim)

        u = self.trim.inputs
        dlat = u.delta_lat + g.roll_kp * e_phi + g.roll_ki * self.int_roll \
            - g.roll_kd * rates.p
        dlon = u.delta_lon + g.pitch_kp * e_theta + g.pitch_ki * self.int_pitch \
            - g.pitch_kd * rates.q
        dped = u.delta_ped + g.yaw_kp * e_psi + g.yaw_ki * self.int_yaw
        return dlat, dlon, dped


@dataclass(frozen=True)
class ReferenceSegment:
    """Position reference active from t_start; ramps from p0 at rate v."""

    t_start: float
    p0: np.ndarray           # NED position at segment start
    v: np.ndarray            # NED velocity along the segment
    psi: float = 0.0


def reference_at(segments, t: float) -> PositionReference:
    active = segments[0]
    for seg in segments:
        if seg.t_start <= t:
            active = seg
        else:
            break
    dt = t - active.t_start
    p = active.p0 + active.v * dt
    return PositionReference(p_ref=NedPosition(p[0], p[1], p[2]),
                             v_ref=active.v.copy(), psi_ref=active.psi)


def reference_events(segments) -> list[float]:
    return [seg.t_start for seg in segments]


@dataclass
class ScenarioConfig:
    name: str = "scenario"
    duration: float = 30.0
    dt: float = 0.002
    controller: str = "hinf"          # hinf | pid | open_loop
    use_outer: bool = True
    wind: WindModel = field(default_factory=WindModel)
    references: tuple = ()
    seed: int = 0
    initial_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    att_ref: np.ndarray | None = None  # fixed attitude reference when outer is off

    def validate(self) -> "ScenarioConfig":
        if self.duration <= 0.0:
            raise ConfigError("duration must be > 0")
        if not 0.0 < self.dt <= 0.02:
            raise ConfigError("dt must lie in (0, 0.02]")
        if self.controller not in ("hinf", "pid", "open_loop"):
            raise ConfigError(f"unknown controller '{self.controller}'")
        if self.use_outer:
            if not self.references:
                raise ConfigError("outer loop requires reference segments")
            starts = [seg.t_start for seg in self.references]
            if sorted(starts) != starts or len(set(starts)) != len(starts):
                raise ConfigError("reference segments must be time-ordered "
                                  "and non-overlapping")
        self.wind.validate()
        return self


@dataclass
class SimArtifacts:
    """Everything a scenario needs beyond its configuration."""

    trim: TrimPoint
    synthesis: SynthesisResult | None = None
    observer: ObserverDesign | None = None
    pid_gains: PidGains = field(default_factory=PidGains)
    outer_gains: OuterGains = field(default_factory=OuterGains)


@dataclass
class ScenarioLog:
    t: np.ndarray
    states: np.ndarray       # (n, 15)
    inputs: np.ndarray       # (n, 4)
    wind: np.ndarray         # (n, 3)
    att_ref: np.ndarray      # (n, 3)
    estimates: np.ndarray    # (n, 3) deviation estimates
    sat_flags: np.ndarray    # (n,) integer bit masks
    config: ScenarioConfig

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(LOG_COLUMNS + "\n")
            for i in range(self.t.size):
                row = [self.t[i], *self.states[i], *self.inputs[i],
                       *self.wind[i], *self.att_ref[i], *self.estimates[i]]
                fh.write(",".join(repr(float(v)) for v in row)
                         + f",{int(self.sat_flags[i])}\n")


def read_log_csv(path) -> dict:
    """Read a scenario log back into named column arrays."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.array([[float(v) for v in line.strip().split(",")]
                         for line in fh if line.strip()])
    if header != LOG_COLUMNS.split(","):
        raise ConfigError("unexpected log header")
    return {name: data[:, k] for k, name in enumerate(header)}


@dataclass(frozen=True)
class MetricsReport:
    max_phi_err_deg: float
    max_theta_err_deg: float
    rms_vel_err: np.ndarray      # per NED axis, settled windows (m/s)
    max_vel_err: np.ndarray      # per NED axis, settled windows (m/s)
    horizontal_envelope: float   # max horizontal distance from reference (m)
    altitude_envelope: float     # max altitude error magnitude (m)

    def as_dict(self) -> dict:
        return {
            "max_phi_err_deg": self.max_phi_err_deg,
            "max_theta_err_deg": self.max_theta_err_deg,
            "rms_vn_err": float(self.rms_vel_err[0]),
            "rms_ve_err": float(self.rms_vel_err[1]),
            "rms_vd_err": float(self.rms_vel_err[2]),
            "max_vn_err": float(self.max_vel_err[0]),
            "max_ve_err": float(self.max_vel_err[1]),
            "max_vd_err": float(self.max_vel_err[2]),
            "horizontal_envelope_m": self.horizontal_envelope,
            "altitude_envelope_m": self.altitude_envelope,
        }


def _event_times(config: ScenarioConfig) -> list[float]:
    events = [0.0]
    if config.use_outer:
        events.extend(seg.t_start for seg in config.references)
    for g in config.wind.gusts:
        events.extend((g.start, g.end))
    return sorted(set(e for e in events if 0.0 <= e < config.duration))


def settled_mask(t: np.ndarray, config: ScenarioConfig,
                 window: float = SETTLE_WINDOW) -> np.ndarray:
    """True where t is at least `window` past every reference or gust event."""
    mask = np.ones_like(t, dtype=bool)
    for ev in _event_times(config):
        mask &= ~((t >= ev - 1e-12) & (t < ev + window))
    return mask


def _rotation_rows(phi, theta, psi):
    sph, cph = np.sin(phi), np.cos(phi)
    sth, cth = np.sin(theta), np.cos(theta)
    sps, cps = np.sin(psi), np.cos(psi)
    r = np.empty((phi.size, 3, 3))
    r[:, 0, 0] = cth * cps
    r[:, 0, 1] = sph * sth * cps - cph * sps
    r[:, 0, 2] = cph * sth * cps + sph * sps
    r[:, 1, 0] = cth * sps
    r[:, 1, 1] = sph * sth * sps + cph * cps
    r[:, 1, 2] = cph * sth * sps - sph * cps
    r[:, 2, 0] = -sth
    r[:, 2, 1] = sph * cth
    r[:, 2, 2] = cph * cth
    return r


def compute_metrics(t, states, att_ref, config: ScenarioConfig) -> MetricsReport:
    """Reduce logged trajectories to the hover-precision metrics.

    Attitude errors are taken over the whole run; velocity and position
    envelopes only over settled windows (2 s past every reference change or
    gust edge).
    """
    t = np.asarray(t)
    states = np.asarray(states)
    att_ref = np.asarray(att_ref)

    phi_err = states[:, 6] - att_ref[:, 0]
    theta_err = states[:, 7] - att_ref[:, 1]
    max_phi = float(np.max(np.abs(phi_err))) * 180.0 / math.pi
    max_theta = float(np.max(np.abs(theta_err))) * 180.0 / math.pi

    if config.use_outer and config.references:
        p_ref = np.empty((t.size, 3))
        v_ref = np.empty((t.size, 3))
        for i, ti in enumerate(t):
            ref = reference_at(config.references, ti)
            p_ref[i] = (ref.p_ref.pn, ref.p_ref.pe, ref.p_ref.pd)
            v_ref[i] = ref.v_ref
        rot = _rotation_rows(states[:, 6], states[:, 7], states[:, 8])
        v_ned = np.einsum("nij,nj->ni", rot, states[:, 3:6])
        vel_err = v_ned - v_ref
        pos_err = states[:, 0:3] - p_ref

        mask = settled_mask(t, config)
        if not np.any(mask):
            mask = np.ones_like(t, dtype=bool)
        ve = vel_err[mask]
        rms = np.sqrt(np.mean(ve ** 2, axis=0))
        vmax = np.max(np.abs(ve), axis=0)

        # position envelopes describe station keeping, so only settled
        # stretches of zero-velocity (hover) segments count
        hover = mask & np.all(v_ref == 0.0, axis=1)
        if not np.any(hover):
            hover = mask
        pe = pos_err[hover]
        horiz = float(np.max(np.hypot(pe[:, 0], pe[:, 1])))
        alt = float(np.max(np.abs(pe[:, 2])))
    else:
        rms = np.zeros(3)
        vmax = np.zeros(3)
        horiz = 0.0
        alt = 0.0
    return MetricsReport(max_phi_err_deg=max_phi, max_theta_err_deg=max_theta,
                         rms_vel_err=rms, max_vel_err=vmax,
                         horizontal_envelope=horiz, altitude_envelope=alt)


def run_scenario(config: ScenarioConfig, params: HelicopterParams,
                 artifacts: SimArtifacts) -> tuple[ScenarioLog, MetricsReport]:
    """Execute one closed-loop scenario.

    Loop order per step: sample wind, evaluate references and the outer loop,
    form the inner-loop command from measurements plus observer estimates,
    log, integrate the plant one RK4 step with everything held, then step the
    observer on the same held measurements.
    """
    config.validate()
    if config.controller == "hinf" and (artifacts.synthesis is None
                                        or artifacts.observer is None):
        raise ConfigError("hinf controller requires synthesis and observer artifacts")

    par = params
    trim = artifacts.trim
    n_steps = int(round(config.duration / config.dt))
    dt = config.dt
    times = np.arange(n_steps + 1) * dt

    wind_seq = config.wind.realize(config.duration, config.seed)

    x = trim.state.as_vector().copy()
    x[0:3] += config.initial_offset
    x_trim = trim.state.as_vector()
    u_trim3 = trim.inputs.as_vector()[0:3]
    col_trim = trim.inputs.delta_col

    att_ref_fixed = (np.asarray(config.att_ref, dtype=float)
                     if config.att_ref is not None else trim.h_out_trim.copy())

    pid = PidAttitudeController(artifacts.pid_gains, trim)
    obs_design = artifacts.observer
    obs_state = (observer_init(obs_design, np.zeros(6))
                 if obs_design is not None else None)
    z_trim = np.array([trim.state.flap.a_s, trim.state.flap.b_s,
                       trim.dped_prime])

    states = np.empty((n_steps + 1, N_STATES))
    inputs = np.empty((n_steps + 1, 4))
    winds = np.empty((n_steps + 1, 3))
    att_refs = np.empty((n_steps + 1, 3))
    estimates = np.zeros((n_steps + 1, 3))
    flags = np.zeros(n_steps + 1, dtype=int)

    def deriv(xv, uv, wv):
        return _state_derivative_flat(xv, uv, wv, par)

    carry_flags = 0
    for k in range(n_steps + 1):
        t = times[k]
        if not np.all(np.isfinite(x)):
            raise SimulationAbort(k, t)
        w = wind_seq.at(t)
        state = FullState.from_vector(x)
        step_flags = carry_flags
        carry_flags = 0

        # outer loop; tilt commands are deviations about the trim attitude
        if config.use_outer:
            ref = reference_at(config.references, t)
            theta_dev, phi_dev, tilt_sat = horizontal_control(
                ref, state, artifacts.outer_gains)
            if tilt_sat:
                step_flags |= SAT_TILT
            delta_col, col_sat = altitude_control(
                ref, state, artifacts.outer_gains, par)
            if col_sat:
                step_flags |= SAT_DCOL
            att_ref = np.array([trim.h_out_trim[0] + phi_dev,
                                trim.h_out_trim[1] + theta_dev,
                                ref.psi_ref])
        else:
            att_ref = att_ref_fixed
            delta_col = col_trim

        # measurements (deviations from trim)
        dx = x - x_trim
        y_dev = np.array([dx[6], dx[7], dx[9], dx[10], dx[11], dx[8]])

        # inner loop
        if config.controller == "hinf":
            x_hat = assemble_state_estimate(y_dev, obs_state.estimate)
            u_cmd, sat = control_law(artifacts.synthesis, x_hat, att_ref,
                                     u_trim3, delta_col=delta_col)
            step_flags |= sat
            u = u_cmd.as_vector()
        elif config.controller == "pid":
            dlat, dlon, dped = pid.step(state, att_ref, dt)
            u_cmd, sat = ControlInputs(dlat, dlon, dped, delta_col).clamped()
            step_flags |= sat
            u = u_cmd.as_vector()
        else:  # open loop at trim
            u = trim.inputs.as_vector().copy()
            u[3] = col_trim

        gyro_out = par.kp_g * (par.ka_g * u[2] - x[11]) + x[14]
        if abs(gyro_out) > 1.0:
            step_flags |= SAT_GYRO

        states[k] = x
        inputs[k] = u
        winds[k] = w
        att_refs[k] = att_ref
        if obs_state is not None:
            estimates[k] = obs_state.estimate + z_trim
        flags[k] = step_flags

        if k == n_steps:
            break

        x = rk4_step(deriv, x, u, w, dt)
        for idx in (12, 13):  # mechanical flapping stops
            if abs(x[idx]) > par.flap_limit:
                x[idx] = math.copysign(par.flap_limit, x[idx])
                carry_flags |= SAT_FLAP
        if obs_state is not None:
            obs_state = observer_step(obs_design, obs_state, y_dev,
                                      u[0:3] - u_trim3, dt)

    log = ScenarioLog(t=times, states=states, inputs=inputs, wind=winds,
                      att_ref=att_refs, estimates=estimates, sat_flags=flags,
                      config=config)
    metrics = compute_metrics(times, states, att_refs, config)
    return log, metrics


@dataclass(frozen=True)
class ComparisonReport:
    metrics_a: MetricsReport
    metrics_b: MetricsReport
    label_a: str
    label_b: str

    def ratios(self) -> dict:
        da, db = self.metrics_a.as_dict(), self.metrics_b.as_dict()
        out = {}
        for key in da:
            if abs(db[key]) < 1e-12:
                out[key] = float("nan") if abs(da[key]) < 1e-12 else float("inf")
            else:
                out[key] = da[key] / db[key]
        return out

    def table(self) -> str:
        da, db = self.metrics_a.as_dict(), self.metrics_b.as_dict()
        ratios = self.ratios()
        lines = [f"{'metric':<24}{self.label_a:>14}{self.label_b:>14}{'ratio':>10}"]
        for key in da:
            r = ratios[key]
            r_str = "n/a" if math.isnan(r) else f"{r:.3f}"
            lines.append(f"{key:<24}{da[key]:>14.6f}{db[key]:>14.6f}{r_str:>10}")
        return "\n".join(lines)


def compare_controllers(config: ScenarioConfig, params: HelicopterParams,
                        artifacts: SimArtifacts,
                        controllers=("hinf", "pid")
                        ) -> tuple[ComparisonReport, ScenarioLog, ScenarioLog]:
    """Run the same scenario (same wind, seed, references) under two controllers."""
    cfg_a = replace(config, controller=controllers[0])
    cfg_b = replace(config, controller=controllers[1])
    log_a, met_a = run_scenario(cfg_a, params, artifacts)
    log_b, met_b = run_scenario(cfg_b, params, artifacts)
    report = ComparisonReport(metrics_a=met_a, metrics_b=met_b,
                              label_a=controllers[0], label_b=controllers[1])
    return report, log_a, log_b
