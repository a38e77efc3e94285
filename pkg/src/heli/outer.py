"""PD position and altitude control wrapped around the attitude inner loop.

Altitude errors are handled in the up-positive sense and produce a total
thrust command with tilt compensation; horizontal errors are rotated into
the heading frame and turned into bounded attitude references.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import rotation_body_to_ned
from .errors import SingularAttitudeError
from .params import HelicopterParams
from .state import FullState, NedPosition


@dataclass(frozen=True)
class OuterGains:
    kp_z: float = 22.0       # vertical thrust per metre of altitude error (N/m)
    kd_z: float = 30.0       # vertical thrust per m/s of climb-rate error
    kp_x: float = 0.11       # tilt per metre of along-heading error
    kd_x: float = 0.16       # tilt per m/s of along-heading velocity error
    kp_y: float = 0.11
    kd_y: float = 0.16
    tilt_limit: float = 0.30  # attitude reference clamp (rad)
    col_limit: float = 0.90   # collective clamp

    def validate(self) -> "OuterGains":
        for name in ("kp_z", "kd_z", "kp_x", "kd_x", "kp_y", "kd_y"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"outer gain {name} must be >= 0")
        if not 0.0 < self.tilt_limit < math.pi / 2:
            raise ValueError("tilt_limit must lie in (0, pi/2)")
        return self


@dataclass(frozen=True)
class PositionReference:
    p_ref: NedPosition
    v_ref: np.ndarray        # NED velocity reference (m/s)
    psi_ref: float = 0.0


def ned_velocity(state: FullState) -> np.ndarray:
    """Body velocity rotated into the NED frame."""
    r = rotation_body_to_ned(state.attitude)
    v = state.velocity
    return r @ np.array([v.vx, v.vy, v.vz])


def altitude_control(ref: PositionReference, state: FullState,
                     gains: OuterGains, params: HelicopterParams
                     ) -> tuple[float, bool]:
    """Collective command from the altitude PD law with tilt compensation.

    Returns (delta_col, saturated).  At zero error and level attitude the
    commanded thrust equals the vehicle weight exactly.
    """
    att = state.attitude
    cphi, cth = math.cos(att.phi), math.cos(att.theta)
    if abs(att.theta) >= math.pi / 2 or abs(att.phi) >= math.pi / 2:
        raise SingularAttitudeError("tilt compensation undefined at 90 deg")

    e_z = state.position.pd - ref.p_ref.pd          # up-positive altitude error
    h_dot = -ned_velocity(state)[2]
    h_dot_ref = -float(ref.v_ref[2])
    e_z_dot = h_dot_ref - h_dot

    t_cmd = (gains.kp_z * e_z + gains.kd_z * e_z_dot + params.m * params.g) \
        / (cphi * cth)
    delta_col = (t_cmd - params.thrust_trim) / params.k_col
    saturated = abs(delta_col) > gains.col_limit
    if saturated:
        delta_col = math.copysign(gains.col_limit, delta_col)
    return delta_col, saturated


def horizontal_control(ref: PositionReference, state: FullState,
                       gains: OuterGains) -> tuple[float, float, bool]:
    """Attitude references (theta_ref, phi_ref) from horizontal position error.

    Position and velocity errors are rotated from NED into the heading frame;
    forward error commands nose-down pitch, rightward error commands positive
    roll.  The arcsin argument is clamped so references never exceed the tilt
    limit.
    """
    e_n = ref.p_ref.pn - state.position.pn
    e_e = ref.p_ref.pe - state.position.pe
    v = ned_velocity(state)
    ev_n = float(ref.v_ref[0]) - v[0]
    ev_e = float(ref.v_ref[1]) - v[1]

    psi = state.attitude.psi
    cpsi, spsi = math.cos(psi), math.sin(psi)
    e_fwd = cpsi * e_n + spsi * e_e
    e_rgt = -spsi * e_n + cpsi * e_e
    ev_fwd = cpsi * ev_n + spsi * ev_e
    ev_rgt = -spsi * ev_n + cpsi * ev_e

    s_fwd = gains.kp_x * e_fwd + gains.kd_x * ev_fwd
    s_rgt = gains.kp_y * e_rgt + gains.kd_y * ev_rgt

    limit = math.sin(gains.tilt_limit)
    saturated = abs(s_fwd) > limit or abs(s_rgt) > limit
    s_fwd = min(max(s_fwd, -limit), limit)
    s_rgt = min(max(s_rgt, -limit), limit)

    theta_ref = -math.asin(s_fwd)
    phi_ref = math.asin(s_rgt)
    return theta_ref, phi_ref, saturated
