"""Reduced-order estimator for the flap angles and the tail servo command.

Six of the nine model states are measured directly (phi, theta, p, q, r,
psi); the remaining three (a_s, b_s, dped) are reconstructed from those
measurements and the servo inputs.  The estimator runs on deviation
variables about the trim point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import place_poles

from .errors import UnobservablePairError

MEASURED_IDX = (0, 1, 2, 3, 6, 8)    # phi, theta, p, q, r, psi
UNMEASURED_IDX = (4, 5, 7)           # a_s, b_s, dped

DEFAULT_POLES = (-50.0, -50.0, -60.0)


@dataclass(frozen=True)
class ObserverDesign:
    a_obs: np.ndarray    # 3x3 estimator dynamics, Hurwitz
    b_obs: np.ndarray    # 3x6 measurement drive
    h_obs: np.ndarray    # 3x3 input drive
    k_obs: np.ndarray    # 3x6 direct measurement injection
    pole_set: np.ndarray


@dataclass(frozen=True)
class ObserverState:
    x_obs: np.ndarray     # internal 3-vector
    estimate: np.ndarray  # deviation estimate of (a_s, b_s, dped)


def partition_plant(a: np.ndarray, b: np.ndarray):
    """Split the model matrices into measured (y) and unmeasured (z) blocks."""
    my, mz = list(MEASURED_IDX), list(UNMEASURED_IDX)
    a_yy = a[np.ix_(my, my)]
    a_yz = a[np.ix_(my, mz)]
    a_zy = a[np.ix_(mz, my)]
    a_zz = a[np.ix_(mz, mz)]
    b_y = b[my, :]
    b_z = b[mz, :]
    return a_yy, a_yz, a_zy, a_zz, b_y, b_z


def design_reduced_observer(plant, poles=DEFAULT_POLES) -> ObserverDesign:
    """Place the estimation-error poles and assemble the estimator matrices.

    `plant` is a LinearPlant or an (A, B) pair.  Poles must be closed under
    conjugation with negative real parts.
    """
    if hasattr(plant, "a"):
        a, b = plant.a, plant.b
    else:
        a, b = plant
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    poles = np.asarray(poles, dtype=complex)
    if poles.shape != (3,):
        raise ValueError("exactly three observer poles are required")
    if np.any(poles.real >= 0.0):
        raise ValueError("observer poles must have negative real parts")
    if not np.allclose(np.sort_complex(poles),
                       np.sort_complex(np.conj(poles))):
        raise ValueError("observer poles must be closed under conjugation")

    a_yy, a_yz, a_zy, a_zz, b_y, b_z = partition_plant(a, b)

    # observability of the (unmeasured, measured-coupling) pair
    obs = np.vstack([a_yz @ np.linalg.matrix_power(a_zz, k) for k in range(3)])
    if np.linalg.matrix_rank(obs, tol=1e-10) < 3:
        raise UnobservablePairError(
            "unmeasured block is not observable through the measured states")

    if np.all(poles.imag == 0.0):
        wanted = poles.real
    else:
        wanted = poles
    placed = place_poles(a_zz.T, a_yz.T, wanted)
    gain_l = placed.gain_matrix.T

    a_obs = a_zz - gain_l @ a_yz
    k_obs = gain_l
    b_obs = a_zy - gain_l @ a_yy + a_obs @ gain_l
    h_obs = b_z - gain_l @ b_y

    achieved = np.linalg.eigvals(a_obs)
    if np.max(np.abs(np.sort_complex(achieved) - np.sort_complex(poles))) > 1e-6:
        raise UnobservablePairError("pole placement failed to converge")
    return ObserverDesign(a_obs=a_obs, b_obs=b_obs, h_obs=h_obs, k_obs=k_obs,
                          pole_set=np.sort_complex(poles))


def observer_init(design: ObserverDesign, y: np.ndarray,
                  estimate: np.ndarray | None = None) -> ObserverState:
    """Internal state that makes the initial estimate equal `estimate`."""
    y = np.asarray(y, dtype=float)
    if estimate is None:
        estimate = np.zeros(3)
    estimate = np.asarray(estimate, dtype=float)
    x_obs = estimate - design.k_obs @ y
    return ObserverState(x_obs=x_obs, estimate=estimate.copy())


def observer_step(design: ObserverDesign, state: ObserverState,
                  y: np.ndarray, u: np.ndarray, dt: float) -> ObserverState:
    """One RK4 step of the estimator with measurements and inputs held."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    drive = design.b_obs @ y + design.h_obs @ u

    def f(x):
        return design.a_obs @ x + drive

    x = state.x_obs
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    x_new = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return ObserverState(x_obs=x_new, estimate=x_new + design.k_obs @ y)


def assemble_state_estimate(y_dev: np.ndarray, z_est: np.ndarray) -> np.ndarray:
    """Interleave measured deviations and estimates into the 9-state order."""
    x = np.empty(9)
    for k, idx in enumerate(MEASURED_IDX):
        x[idx] = y_dev[k]
    for k, idx in enumerate(UNMEASURED_IDX):
        x[idx] = z_est[k]
    return x
