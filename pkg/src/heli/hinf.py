"""Gamma-suboptimal H-infinity state-feedback synthesis.

The attenuation level gamma parameterizes a game-type algebraic Riccati
equation; its stabilizing solution is extracted from the stable invariant
subspace of the associated Hamiltonian via an ordered real Schur
decomposition, then verified explicitly.  The smallest feasible gamma is
located by bisection and the shipped controller backs off by a small margin.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import SynthesisError, UnstableSystemError
from .state import ControlInputs, SAT_DLAT, SAT_DLON, SAT_DPED

# benchmark attenuation level for the hover design on flight hardware
REFERENCE_GAMMA = 0.0632

# rows of the design state holding the tracked outputs (phi, theta, psi)
TRACKED_ROWS = (0, 1, 8)

N_X = 9
N_U = 3


@dataclass(frozen=True)
class OutputWeights:
    """Weighting blocks of the controlled output h = C x + D u."""

    c11: np.ndarray   # 4x4, weights on (phi, theta, p, q)
    c22: np.ndarray   # 2x5, weights on (a_s, b_s, r, dped, psi)
    d11: np.ndarray   # 3x3, weights on the servo inputs

    @staticmethod
    def default() -> "OutputWeights":
        return OutputWeights(
            c11=np.diag([13.0, 11.0, 1.0, 1.0]),
            c22=np.array([[0.0, 0.0, 1.0, 0.0, 0.0],
                          [0.0, 0.0, 0.0, 0.0, 5.0]]),
            d11=np.diag([12.0, 11.0, 31.0]),
        )


@dataclass(frozen=True)
class ControlledOutputMap:
    """Stacked output matrices: 3 pure-input rows, then the state weights."""

    c: np.ndarray  # 9x9
    d: np.ndarray  # 9x3


@dataclass(frozen=True)
class RiccatiSolution:
    p: np.ndarray
    gamma: float
    residual_norm: float


@dataclass(frozen=True)
class RiccatiInfeasible:
    gamma: float
    reason: str     # imaginary_axis | singular_subspace | verification_failed
    detail: str = ""


@dataclass(frozen=True)
class SynthesisResult:
    f: np.ndarray            # 3x9 state feedback gain
    g: np.ndarray            # 3x3 reference feedforward gain
    gamma: float
    riccati: RiccatiSolution
    h_out_trim: np.ndarray   # (phi, theta, psi) at trim


@dataclass(frozen=True)
class GammaSearchResult:
    gamma_star: float
    gamma_used: float
    solution: RiccatiSolution
    trace: list = field(default_factory=list)  # (gamma, feasible, reason)


@dataclass(frozen=True)
class FeasibilityReport:
    d_rank: int
    d_full_column_rank: bool
    invariant_zeros: np.ndarray
    ok: bool


def build_output_map(weights: OutputWeights) -> ControlledOutputMap:
    """Assemble C (9x9) and D (9x3) from the three weighting blocks."""
    c11 = np.asarray(weights.c11, dtype=float)
    c22 = np.asarray(weights.c22, dtype=float)
    d11 = np.asarray(weights.d11, dtype=float)
    if c11.shape != (4, 4) or c22.shape != (2, 5) or d11.shape != (3, 3):
        raise ValueError("weight blocks must have shapes 4x4, 2x5, 3x3")
    if abs(np.linalg.det(d11)) < 1e-12:
        raise SynthesisError("input weight block is singular")
    c = np.zeros((9, 9))
    c[3:7, 0:4] = c11
    c[7:9, 4:9] = c22
    d = np.zeros((9, 3))
    d[0:3, :] = d11
    return ControlledOutputMap(c=c, d=d)


def _check_dims(a, b, c, d, e):
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("A must be square")
    if b.ndim != 2 or b.shape[0] != n:
        raise ValueError("B row count must match A")
    if c.ndim != 2 or c.shape[1] != n:
        raise ValueError("C column count must match A")
    if d.shape != (c.shape[0], b.shape[1]):
        raise ValueError("D must be (rows of C) x (cols of B)")
    if e.ndim != 2 or e.shape[0] != n:
        raise ValueError("E row count must match A")


def riccati_residual(p, a, b, c, d, e, gamma) -> float:
    """Max-norm of the game Riccati equation left-hand side at P."""
    rtr = d.T @ d
    s = c.T @ d
    lhs = p @ a + a.T @ p + c.T @ c + p @ e @ e.T @ p / gamma ** 2 \
        - (p @ b + s) @ np.linalg.solve(rtr, (s.T + b.T @ p))
    return float(np.max(np.abs(lhs)))


def feedback_gain(p, b, c, d) -> np.ndarray:
    rtr = d.T @ d
    return -np.linalg.solve(rtr, d.T @ c + b.T @ p)


def solve_riccati(a, b, c, d, e, gamma: float):
    """Stabilizing solution of the gamma-parameterized Riccati equation.

    Returns a RiccatiSolution, or a RiccatiInfeasible verdict naming which of
    the three failure modes occurred (Hamiltonian eigenvalues on the imaginary
    axis, singular stable subspace, or failed post-verification).
    """
    a, b, c, d, e = (np.atleast_2d(np.asarray(m, dtype=float))
                     for m in (a, b, c, d, e))
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    _check_dims(a, b, c, d, e)
    n = a.shape[0]

    rtr = d.T @ d
    if np.linalg.matrix_rank(rtr) < b.shape[1]:
        raise ValueError("D must have full column rank")
    r_inv_dt_c = np.linalg.solve(rtr, d.T @ c)
    a_bar = a - b @ r_inv_dt_c
    q_bar = c.T @ c - c.T @ d @ r_inv_dt_c
    g_bar = b @ np.linalg.solve(rtr, b.T) - e @ e.T / gamma ** 2

    ham = np.block([[a_bar, -g_bar],
                    [-q_bar, -a_bar.T]])

    eigs = np.linalg.eigvals(ham)
    scale = max(1.0, np.max(np.abs(eigs)))
    if np.any(np.abs(eigs.real) < 1e-9 * scale):
        return RiccatiInfeasible(gamma, "imaginary_axis",
                                 "Hamiltonian eigenvalues on the imaginary axis")

    t, z, sdim = scipy.linalg.schur(ham, output="real",
                                    sort=lambda re, im: re < 0.0)
    if sdim != n:
        return RiccatiInfeasible(gamma, "imaginary_axis",
                                 f"stable subspace has dimension {sdim} != {n}")
    x1 = z[:n, :n]
    x2 = z[n:, :n]
    if np.linalg.cond(x1) > 1e12:
        return RiccatiInfeasible(gamma, "singular_subspace",
                                 "stable subspace not a graph over the state space")
    p = np.linalg.solve(x1.T, x2.T).T
    p = 0.5 * (p + p.T)

    residual = riccati_residual(p, a, b, c, d, e, gamma)
    if residual >= 1e-8 * (1.0 + np.max(np.abs(p))):
        return RiccatiInfeasible(gamma, "verification_failed",
                                 f"residual {residual:.3e}")
    min_eig = float(np.min(np.linalg.eigvalsh(p)))
    if min_eig <= -1e-10:
        return RiccatiInfeasible(gamma, "verification_failed",
                                 f"minimum eigenvalue {min_eig:.3e}")
    f = feedback_gain(p, b, c, d)
    cl_eigs = np.linalg.eigvals(a + b @ f)
    if np.any(cl_eigs.real >= 0.0):
        return RiccatiInfeasible(gamma, "verification_failed",
                                 "closed loop not Hurwitz")
    return RiccatiSolution(p=p, gamma=float(gamma), residual_norm=residual)


def gamma_star(a, b, c, d, e, tol: float = 1e-4, margin: float = 0.05,
               gamma_hi: float = 1e6, max_iter: int = 200) -> GammaSearchResult:
    """Bisection estimate of the smallest feasible attenuation level.

    Returns the boundary estimate together with a verified solution computed
    at (1 + margin) times the boundary.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    trace = []

    def feasible(g):
        res = solve_riccati(a, b, c, d, e, g)
        ok = isinstance(res, RiccatiSolution)
        trace.append((g, ok, "" if ok else res.reason))
        return ok, res

    ok, res_hi = feasible(gamma_hi)
    if not ok:
        raise SynthesisError(
            f"problem infeasible at the upper bound gamma = {gamma_hi:g} "
            f"({res_hi.reason})")

    lo, hi = 0.0, gamma_hi
    for _ in range(max_iter):
        if hi - lo <= tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if mid <= 0.0:
            break
        ok, _ = feasible(mid)
        if ok:
            hi = mid
        else:
            lo = mid

    g_star = hi
    g_used = g_star * (1.0 + margin)
    result = solve_riccati(a, b, c, d, e, g_used)
    while isinstance(result, RiccatiInfeasible) and g_used < gamma_hi:
        g_used *= 1.0 + margin  # numerical edge right at the boundary
        result = solve_riccati(a, b, c, d, e, g_used)
    if isinstance(result, RiccatiInfeasible):
        raise SynthesisError("no feasible solution above the located boundary")
    return GammaSearchResult(gamma_star=g_star, gamma_used=g_used,
                             solution=result, trace=trace)


def compute_gains(riccati: RiccatiSolution, a, b, c, d,
                  tracked_rows=TRACKED_ROWS,
                  h_out_trim=None) -> SynthesisResult:
    """Feedback and feedforward gains from a verified Riccati solution.

    The feedforward gain inverts the closed-loop DC path of the tracked
    outputs, so constant references are matched exactly in steady state.
    """
    a, b, c, d = (np.asarray(m, dtype=float) for m in (a, b, c, d))
    f = feedback_gain(riccati.p, b, c, d)
    a_cl = a + b @ f
    cl_eigs = np.linalg.eigvals(a_cl)
    if np.any(cl_eigs.real >= 0.0):
        raise SynthesisError("closed loop A + B F is not Hurwitz")
    c_sel = np.zeros((len(tracked_rows), a.shape[0]))
    for i, row in enumerate(tracked_rows):
        c_sel[i, row] = 1.0
    dc = c_sel @ np.linalg.solve(a_cl, b)
    if abs(np.linalg.det(dc)) < 1e-12:
        raise SynthesisError("tracked-output DC gain is singular")
    g = -np.linalg.inv(dc)
    if h_out_trim is None:
        h_out_trim = np.zeros(len(tracked_rows))
    return SynthesisResult(f=f, g=g, gamma=riccati.gamma, riccati=riccati,
                           h_out_trim=np.asarray(h_out_trim, dtype=float))


def control_law(result: SynthesisResult, x: np.ndarray, r: np.ndarray,
                u_trim: np.ndarray, delta_col: float = 0.0
                ) -> tuple[ControlInputs, int]:
    """Cyclic and pedal commands for a deviation state and attitude reference.

    Computes u = F x + G (r - h_out_trim), adds the trim inputs, and clamps
    each servo channel, reporting which channels saturated.  The collective
    channel is passed through untouched.
    """
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    u3 = result.f @ x + result.g @ (r - result.h_out_trim)
    u3 = u3 + np.asarray(u_trim, dtype=float)
    flags = 0
    for i, bit in enumerate((SAT_DLAT, SAT_DLON, SAT_DPED)):
        if abs(u3[i]) > 1.0:
            u3[i] = np.sign(u3[i]) * 1.0
            flags |= bit
    return ControlInputs(u3[0], u3[1], u3[2], delta_col), flags


def hinf_norm(a_cl, e, c_cl, w_lo: float = 1e-3, w_hi: float = 1e4,
              n_grid: int = 2000) -> float:
    """Peak singular value of C (jwI - A)^-1 E over frequency.

    Evaluates a log-spaced grid and refines the peak with a golden-section
    search; relative accuracy is about 1e-4 for peaks inside the grid.
    """
    a_cl = np.asarray(a_cl, dtype=float)
    e = np.atleast_2d(np.asarray(e, dtype=float))
    c_cl = np.atleast_2d(np.asarray(c_cl, dtype=float))
    if e.shape[0] != a_cl.shape[0]:
        e = e.T
    eigs = np.linalg.eigvals(a_cl)
    if np.any(eigs.real >= 0.0):
        raise UnstableSystemError("closed-loop matrix is not Hurwitz")

    n = a_cl.shape[0]
    eye = np.eye(n)

    def sigma(w: float) -> float:
        tf = c_cl @ np.linalg.solve(1j * w * eye - a_cl, e)
        return float(np.linalg.svd(tf, compute_uv=False)[0])

    grid = np.logspace(np.log10(w_lo), np.log10(w_hi), n_grid)
    values = np.array([sigma(w) for w in grid])
    k = int(np.argmax(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, n_grid - 1)]

    # golden-section refinement on the bracketing interval
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = sigma(x1), sigma(x2)
    for _ in range(60):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = sigma(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = sigma(x1)
    return max(float(values[k]), f1, f2)


def check_feasibility(a, b, c, d) -> FeasibilityReport:
    """Rank and invariant-zero diagnostics for the synthesis plant.

    Invariant zeros are the eigenvalues of the input-resolved dynamics
    restricted to the largest invariant subspace on which the controlled
    output can be held at zero.
    """
    a, b, c, d = (np.asarray(m, dtype=float) for m in (a, b, c, d))
    m = b.shape[1]
    d_rank = int(np.linalg.matrix_rank(d, tol=1e-10))
    full = d_rank == m
    if not full:
        return FeasibilityReport(d_rank=d_rank, d_full_column_rank=False,
                                 invariant_zeros=np.array([]), ok=False)

    # with D injective the input is fixed by the state on any output-nulling
    # motion; zeros live where the residual output map can stay at zero
    rtr = d.T @ d
    a_res = a - b @ np.linalg.solve(rtr, d.T @ c)
    proj = np.eye(c.shape[0]) - d @ np.linalg.solve(rtr, d.T)
    c_res = proj @ c

    a_scale = 1.0 + float(np.max(np.abs(a_res)))
    v = scipy.linalg.null_space(c_res)
    while v.shape[1] > 0:
        # shrink V until it is invariant under the resolved dynamics
        av = a_res @ v
        resid = av - v @ np.linalg.lstsq(v, av, rcond=None)[0]
        if np.max(np.abs(resid)) < 1e-9 * a_scale:
            break
        keep = scipy.linalg.null_space(resid, rcond=1e-10)
        if keep.shape[1] == v.shape[1]:
            break
        if keep.shape[1] == 0:
            v = np.zeros((a.shape[0], 0))
            break
        v = v @ keep
    if v.shape[1] == 0:
        zeros = np.array([])
    else:
        a_v = np.linalg.lstsq(v, a_res @ v, rcond=None)[0]
        zeros = np.linalg.eigvals(a_v)
    return FeasibilityReport(d_rank=d_rank, d_full_column_rank=True,
                             invariant_zeros=zeros, ok=zeros.size == 0)


def synthesize(plant, weights: OutputWeights | None = None,
               tol: float = 1e-4, margin: float = 0.05
               ) -> tuple[SynthesisResult, GammaSearchResult, FeasibilityReport]:
    """Full inner-loop synthesis pipeline for a linearized plant."""
    if weights is None:
        weights = OutputWeights.default()
    out_map = build_output_map(weights)
    report = check_feasibility(plant.a, plant.b, out_map.c, out_map.d)
    if not report.d_full_column_rank:
        raise SynthesisError("output map D is column rank deficient")
    search = gamma_star(plant.a, plant.b, out_map.c, out_map.d, plant.e,
                        tol=tol, margin=margin)
    result = compute_gains(search.solution, plant.a, plant.b,
                           out_map.c, out_map.d,
                           h_out_trim=plant.trim.h_out_trim)
    return result, search, report
