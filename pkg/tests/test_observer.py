import numpy as np
import pytest

from heli import (
    UnobservablePairError,
    design_reduced_observer,
    observer_init,
    observer_step,
)
from heli.observer import (
    DEFAULT_POLES,
    MEASURED_IDX,
    UNMEASURED_IDX,
    assemble_state_estimate,
    partition_plant,
)
from heli.sim import rk4_step


def _toy_plant():
    """Unmeasured block already decoupled with identity coupling into the
    first three measured rates; the per-axis placement is solvable by hand."""
    a = np.zeros((9, 9))
    for k, idx in enumerate(UNMEASURED_IDX):
        a[idx, idx] = -1.0
        a[MEASURED_IDX[k], idx] = 1.0
    for idx in MEASURED_IDX:
        a[idx, idx] += -2.0
    b = np.zeros((9, 3))
    b[UNMEASURED_IDX, (0, 1, 2)] = 1.0
    return a, b


class TestDesign:
    def test_default_poles_are_placed(self, observer_design):
        achieved = np.sort_complex(np.linalg.eigvals(observer_design.a_obs))
        wanted = np.sort_complex(np.asarray(DEFAULT_POLES, dtype=complex))
        assert np.max(np.abs(achieved - wanted)) < 1e-6

    def test_design_matrices_shapes(self, observer_design):
        assert observer_design.a_obs.shape == (3, 3)
        assert observer_design.b_obs.shape == (3, 6)
        assert observer_design.h_obs.shape == (3, 3)
        assert observer_design.k_obs.shape == (3, 6)

    def test_toy_plant_hand_placement(self):
        a, b = _toy_plant()
        poles = (-2.0, -3.0, -4.0)
        design = design_reduced_observer((a, b), poles)
        achieved = np.sort(np.linalg.eigvals(design.a_obs).real)
        assert np.allclose(achieved, sorted(poles), atol=1e-9)
        # hand solution: per-axis gains L[k, k] = pole_k magnitude - 1
        _, a_yz, _, a_zz, _, _ = partition_plant(a, b)
        l_hand = np.zeros((3, 6))
        for k, pole in enumerate(poles):
            l_hand[k, k] = -pole - 1.0
        assert np.allclose(np.sort(np.linalg.eigvals(a_zz - l_hand @ a_yz).real),
                           sorted(poles), atol=1e-12)

    def test_unstable_poles_rejected(self, plant):
        with pytest.raises(ValueError):
            design_reduced_observer(plant, (-50.0, 50.0, -60.0))

    def test_unpaired_complex_poles_rejected(self, plant):
        with pytest.raises(ValueError):
            design_reduced_observer(plant, (-50.0, -40.0 + 5.0j, -60.0))

    def test_complex_pair_accepted(self, plant):
        design = design_reduced_observer(
            plant, (-40.0 + 8.0j, -40.0 - 8.0j, -60.0))
        achieved = np.sort_complex(np.linalg.eigvals(design.a_obs))
        assert np.max(np.abs(achieved - np.sort_complex(
            np.array([-40.0 + 8.0j, -40.0 - 8.0j, -60.0])))) < 1e-6

    def test_unobservable_pair_rejected(self):
        a, b = _toy_plant()
        for idx in UNMEASURED_IDX:
            a[MEASURED_IDX, idx] = 0.0  # sever every measured coupling
        with pytest.raises(UnobservablePairError):
            design_reduced_observer((a, b), (-2.0, -3.0, -4.0))


class TestStep:
    def test_origin_is_fixed_point(self, observer_design):
        state = observer_init(observer_design, np.zeros(6))
        out = observer_step(observer_design, state, np.zeros(6), np.zeros(3),
                            0.002)
        assert np.all(out.x_obs == 0.0)
        assert np.all(out.estimate == 0.0)

    def test_estimate_definition_holds(self, observer_design):
        rng = np.random.default_rng(5)
        y = rng.standard_normal(6)
        state = observer_init(observer_design, y, estimate=rng.standard_normal(3))
        for _ in range(20):
            state = observer_step(observer_design, state, y,
                                  rng.standard_normal(3), 0.002)
            assert np.allclose(state.estimate,
                               state.x_obs + observer_design.k_obs @ y,
                               atol=1e-14)

    def test_constant_measurement_steady_state(self, observer_design):
        y = np.array([0.01, -0.02, 0.0, 0.03, 0.0, 0.01])
        state = observer_init(observer_design, y)
        for _ in range(5000):
            state = observer_step(observer_design, state, y, np.zeros(3), 0.002)
        expect = -np.linalg.solve(observer_design.a_obs,
                                  observer_design.b_obs @ y)
        assert np.allclose(state.x_obs, expect, atol=1e-9)

    def test_nonpositive_dt_rejected(self, observer_design):
        state = observer_init(observer_design, np.zeros(6))
        with pytest.raises(ValueError):
            observer_step(observer_design, state, np.zeros(6), np.zeros(3), 0.0)


class TestErrorDynamics:
    def test_error_decays_from_flap_offset(self, params, trim, plant,
                                           observer_design):
        # plant parked at trim: estimation error follows the design dynamics
        state = observer_init(observer_design, np.zeros(6),
                              estimate=np.array([0.05, 0.0, 0.0]))
        dt = 0.002
        err = [np.linalg.norm(state.estimate)]
        for _ in range(int(1.0 / dt)):
            state = observer_step(observer_design, state, np.zeros(6),
                                  np.zeros(3), dt)
            err.append(np.linalg.norm(state.estimate))
        err = np.array(err)
        assert err[-1] < 1e-3
        tail = err[int(0.1 / dt):]
        assert np.all(np.diff(tail) <= 1e-15)

    def test_error_trajectory_independent_of_input(self, plant,
                                                   observer_design):
        # coupled plant/observer integration: the error subspace is invariant,
        # so arbitrary servo activity cancels out of the error exactly
        a, b = plant.a, plant.b
        des = observer_design
        c_m = np.zeros((6, 9))
        for k, idx in enumerate(MEASURED_IDX):
            c_m[k, idx] = 1.0
        sel_z = np.zeros((3, 9))
        for k, idx in enumerate(UNMEASURED_IDX):
            sel_z[k, idx] = 1.0

        a_big = np.block([[a, np.zeros((9, 3))],
                          [des.b_obs @ c_m, des.a_obs]])
        b_big = np.vstack([b, des.h_obs])

        rng = np.random.default_rng(17)
        x0 = np.zeros(12)
        x0[0:9] = 0.02 * rng.standard_normal(9)
        x0[9:] = sel_z @ x0[0:9] - des.k_obs @ (c_m @ x0[0:9])  # zero error start

        def run(u_seq):
            x = x0.copy()
            errs = []
            for u in u_seq:
                def f(xv, uv, wv):
                    return a_big @ xv + b_big @ u
                x = rk4_step(f, x, None, None, 0.002)
                est = x[9:] + des.k_obs @ (c_m @ x[0:9])
                errs.append(sel_z @ x[0:9] - est)
            return np.array(errs)

        n = 500
        err_quiet = run(np.zeros((n, 3)))
        err_busy = run(0.5 * rng.standard_normal((n, 3)))
        assert np.max(np.abs(err_quiet - err_busy)) < 1e-9

    def test_separation_of_closed_loop_spectrum(self, plant, synthesis,
                                                observer_design):
        result, _, _ = synthesis
        f = result.f
        des = observer_design
        c_m = np.zeros((6, 9))
        for k, idx in enumerate(MEASURED_IDX):
            c_m[k, idx] = 1.0
        p_y = np.zeros((9, 6))
        for k, idx in enumerate(MEASURED_IDX):
            p_y[idx, k] = 1.0
        p_z = np.zeros((9, 3))
        for k, idx in enumerate(UNMEASURED_IDX):
            p_z[idx, k] = 1.0

        # u = F (P_y y + P_z (x' + K y)) with y = C_m x
        feed = p_y @ c_m + p_z @ des.k_obs @ c_m
        a_big = np.block([
            [plant.a + plant.b @ f @ feed, plant.b @ f @ p_z],
            [des.b_obs @ c_m + des.h_obs @ f @ feed,
             des.a_obs + des.h_obs @ f @ p_z],
        ])
        got = np.sort_complex(np.linalg.eigvals(a_big))
        expect = np.sort_complex(np.concatenate([
            np.linalg.eigvals(plant.a + plant.b @ f),
            np.linalg.eigvals(des.a_obs),
        ]))
        assert np.max(np.abs(got - expect)) < 1e-6


class TestAssemble:
    def test_interleaving(self):
        y = np.arange(1.0, 7.0)
        z = np.array([10.0, 20.0, 30.0])
        x = assemble_state_estimate(y, z)
        assert list(x) == [1.0, 2.0, 3.0, 4.0, 10.0, 20.0, 5.0, 30.0, 6.0]
