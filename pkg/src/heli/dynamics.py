"""Continuous-time nonlinear helicopter model.

Four coupled pieces make up the state derivative: rigid-body kinematics and
dynamics, first-order main-rotor flapping, and the onboard yaw-rate PI loop.
All functions are pure; repeated evaluation with identical arguments is
bit-identical.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import SingularAttitudeError
from .params import HelicopterParams
from .state import (
    ControlInputs,
    EulerAngles,
    FlapState,
    ForceMoment,
    FullState,
    BodyRates,
    WindVector,
    YawGyroState,
    as_input_vector,
    as_state_vector,
    as_wind_vector,
    N_STATES,
)

THETA_LIMIT = math.pi / 2.0


def _check_theta(theta: float):
    if abs(theta) >= THETA_LIMIT:
        raise SingularAttitudeError(f"|theta| = {abs(theta):.4f} rad >= pi/2")


def rotation_body_to_ned(attitude: EulerAngles) -> np.ndarray:
    """ZYX (yaw-pitch-roll) direction cosine matrix mapping body vectors to NED."""
    _check_theta(attitude.theta)
    sphi, cphi = math.sin(attitude.phi), math.cos(attitude.phi)
    sth, cth = math.sin(attitude.theta), math.cos(attitude.theta)
    spsi, cpsi = math.sin(attitude.psi), math.cos(attitude.psi)
    return np.array([
        [cth * cpsi, sphi * sth * cpsi - cphi * spsi, cphi * sth * cpsi + sphi * spsi],
        [cth * spsi, sphi * sth * spsi + cphi * cpsi, cphi * sth * spsi - sphi * cpsi],
        [-sth,       sphi * cth,                      cphi * cth],
    ])


def euler_rates(attitude: EulerAngles, rates: BodyRates) -> np.ndarray:
    """Euler angle rates (phi_dot, theta_dot, psi_dot) from body rates."""
    _check_theta(attitude.theta)
    sphi, cphi = math.sin(attitude.phi), math.cos(attitude.phi)
    cth = math.cos(attitude.theta)
    tth = math.tan(attitude.theta)
    p, q, r = rates.p, rates.q, rates.r
    return np.array([
        p + tth * (sphi * q + cphi * r),
        cphi * q - sphi * r,
        (sphi * q + cphi * r) / cth,
    ])


def flap_coupling(params: HelicopterParams) -> float:
    """Longitudinal/lateral flap cross-coupling coefficient.

    The lateral equation uses the negated value; a teetering head
    (zero hub stiffness) decouples the two axes.
    """
    return 8.0 * params.k_beta / (params.gamma_mr * params.omega_mr ** 2 * params.i_beta)


def flap_derivatives(flap: FlapState, rates: BodyRates,
                     delta_lat: float, delta_lon: float,
                     params: HelicopterParams) -> np.ndarray:
    """Time derivative (a_s_dot, b_s_dot) of the tip-path-plane tilt."""
    a_bs = flap_coupling(params)
    theta_a = params.k_lon * delta_lon   # longitudinal cyclic blade pitch
    theta_b = params.k_lat * delta_lat   # lateral cyclic blade pitch
    inv_tau = 1.0 / params.tau_mr
    a_dot = -rates.q - inv_tau * flap.a_s + a_bs * flap.b_s + inv_tau * theta_a
    b_dot = -rates.p - inv_tau * flap.b_s - a_bs * flap.a_s + inv_tau * theta_b
    return np.array([a_dot, b_dot])


def yaw_gyro_output(gyro: YawGyroState, delta_ped: float, r: float,
                    params: HelicopterParams) -> tuple[float, float]:
    """Tail servo command and integrator rate of the onboard yaw-rate PI loop.

    Returns (delta_ped_prime, xi_dot) with the servo command clamped to the
    actuator range before it reaches the tail rotor.
    """
    err = params.ka_g * delta_ped - r
    out = params.kp_g * err + gyro.xi
    out = min(max(out, -1.0), 1.0)
    return out, params.ki_g * err


def forces_and_moments(state: FullState, inputs: ControlInputs,
                       wind: WindVector, params: HelicopterParams) -> ForceMoment:
    """Net body-axis force and moment.

    Hover-regime model: rotor thrust tilted by the flap angles, tail-rotor
    side force, linear drag on the wind-relative airspeed acting at a centre
    of pressure above the CG, gravity, rotor reaction torque, and linear rate
    damping.  Wind enters only through the relative airspeed.
    """
    par = params
    att, vel, rts = state.attitude, state.velocity, state.rates
    _check_theta(att.theta)

    thrust = par.thrust_trim + par.k_col * inputs.delta_col
    sa, ca = math.sin(state.flap.a_s), math.cos(state.flap.a_s)
    sb, cb = math.sin(state.flap.b_s), math.cos(state.flap.b_s)

    dped_prime, _ = yaw_gyro_output(state.gyro, inputs.delta_ped, rts.r, par)
    tail_y = -par.k_ped * dped_prime

    # drag on relative airspeed, applied at the centre of pressure
    rel = np.array([vel.vx - wind.u_w, vel.vy - wind.v_w, vel.vz - wind.w_w])
    drag = np.array([-par.dx * rel[0], -par.dy * rel[1], -par.dz * rel[2]])

    sphi, cphi = math.sin(att.phi), math.cos(att.phi)
    sth, cth = math.sin(att.theta), math.cos(att.theta)
    grav = par.m * par.g * np.array([-sth, sphi * cth, cphi * cth])

    f = np.array([
        -thrust * sa + drag[0] + grav[0],
        thrust * sb + tail_y + drag[1] + grav[1],
        -thrust * ca * cb + drag[2] + grav[2],
    ])

    hub = par.k_beta + thrust * par.h_mr
    tau = np.array([
        hub * state.flap.b_s - par.lp * rts.p + par.h_tr * tail_y + par.h_cp * drag[1],
        hub * state.flap.a_s - par.mq * rts.q - par.h_cp * drag[0],
        -par.torque_scale * thrust + par.l_tr * par.k_ped * dped_prime - par.nr * rts.r,
    ])
    return ForceMoment(f=f, tau=tau)


def state_derivative(state, inputs, wind, params: HelicopterParams) -> np.ndarray:
    """Flat 15-element time derivative of the full nonlinear state."""
    x = as_state_vector(state)
    u = as_input_vector(inputs)
    w = as_wind_vector(wind)
    return _state_derivative_flat(x, u, w, params)


def _state_derivative_flat(x: np.ndarray, u: np.ndarray, w: np.ndarray,
                           par: HelicopterParams) -> np.ndarray:
    vx, vy, vz = x[3], x[4], x[5]
    phi, theta, psi = x[6], x[7], x[8]
    p, q, r = x[9], x[10], x[11]
    a_s, b_s, xi = x[12], x[13], x[14]
    dlat, dlon, dped, dcol = u[0], u[1], u[2], u[3]

    _check_theta(theta)
    sphi, cphi = math.sin(phi), math.cos(phi)
    sth, cth = math.sin(theta), math.cos(theta)
    spsi, cpsi = math.sin(psi), math.cos(psi)
    tth = sth / cth

    # kinematics: NED position rate and Euler angle rates
    pn_dot = cth * cpsi * vx + (sphi * sth * cpsi - cphi * spsi) * vy \
        + (cphi * sth * cpsi + sphi * spsi) * vz
    pe_dot = cth * spsi * vx + (sphi * sth * spsi + cphi * cpsi) * vy \
        + (cphi * sth * spsi - sphi * cpsi) * vz
    pd_dot = -sth * vx + sphi * cth * vy + cphi * cth * vz

    phi_dot = p + tth * (sphi * q + cphi * r)
    theta_dot = cphi * q - sphi * r
    psi_dot = (sphi * q + cphi * r) / cth

    # forces and moments
    thrust = par.thrust_trim + par.k_col * dcol
    sa, ca = math.sin(a_s), math.cos(a_s)
    sb, cb = math.sin(b_s), math.cos(b_s)

    err = par.ka_g * dped - r
    dped_prime = par.kp_g * err + xi
    dped_prime = min(max(dped_prime, -1.0), 1.0)
    tail_y = -par.k_ped * dped_prime

    drag_x = -par.dx * (vx - w[0])
    drag_y = -par.dy * (vy - w[1])
    drag_z = -par.dz * (vz - w[2])

    mg = par.m * par.g
    fx = -thrust * sa + drag_x - mg * sth
    fy = thrust * sb + tail_y + drag_y + mg * sphi * cth
    fz = -thrust * ca * cb + drag_z + mg * cphi * cth

    hub = par.k_beta + thrust * par.h_mr
    mx = hub * b_s - par.lp * p + par.h_tr * tail_y + par.h_cp * drag_y
    my = hub * a_s - par.mq * q - par.h_cp * drag_x
    mz = -par.torque_scale * thrust + par.l_tr * par.k_ped * dped_prime - par.nr * r

    # rigid body: translational and rotational dynamics
    inv_m = 1.0 / par.m
    vx_dot = -(q * vz - r * vy) + fx * inv_m
    vy_dot = -(r * vx - p * vz) + fy * inv_m
    vz_dot = -(p * vy - q * vx) + fz * inv_m

    p_dot = (mx - (q * r * (par.jz - par.jy))) / par.jx
    q_dot = (my - (p * r * (par.jx - par.jz))) / par.jy
    r_dot = (mz - (p * q * (par.jy - par.jx))) / par.jz

    # flapping and gyro integrator
    a_bs = flap_coupling(par)
    inv_tau = 1.0 / par.tau_mr
    a_s_dot = -q - inv_tau * a_s + a_bs * b_s + inv_tau * par.k_lon * dlon
    b_s_dot = -p - inv_tau * b_s - a_bs * a_s + inv_tau * par.k_lat * dlat
    xi_dot = par.ki_g * err

    out = np.empty(N_STATES)
    out[0] = pn_dot
    out[1] = pe_dot
    out[2] = pd_dot
    out[3] = vx_dot
    out[4] = vy_dot
    out[5] = vz_dot
    out[6] = phi_dot
    out[7] = theta_dot
    out[8] = psi_dot
    out[9] = p_dot
    out[10] = q_dot
    out[11] = r_dot
    out[12] = a_s_dot
    out[13] = b_s_dot
    out[14] = xi_dot
    return out
