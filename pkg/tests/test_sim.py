import math

import numpy as np
import pytest

from heli import (
    ConfigError,
    FullState,
    PidGains,
    PidAttitudeController,
    ReferenceSegment,
    SimArtifacts,
    SimulationAbort,
    WindModel,
    builtin_names,
    builtin_scenario,
    compare_controllers,
    compute_metrics,
    rk4_step,
    run_scenario,
)
from heli.dynamics import _state_derivative_flat
from heli.sim import LOG_COLUMNS, read_log_csv, reference_at, settled_mask


class TestRk4:
    def test_exponential_single_step(self):
        f = lambda x, u, w: -x
        x1 = rk4_step(f, np.array([1.0]), None, None, 0.01)
        assert abs(x1[0] - math.exp(-0.01)) < 1e-10

    def test_zero_derivative_fixed_point(self):
        f = lambda x, u, w: np.zeros_like(x)
        x0 = np.array([3.0, -1.0])
        assert np.array_equal(rk4_step(f, x0, None, None, 0.5), x0)

    def test_fourth_order_convergence(self):
        f = lambda x, u, w: -x

        def global_err(dt):
            x = np.array([1.0])
            for _ in range(int(round(1.0 / dt))):
                x = rk4_step(f, x, None, None, dt)
            return abs(x[0] - math.exp(-1.0))

        ratio = global_err(0.01) / global_err(0.005)
        assert 12.0 < ratio < 20.0

    def test_nonpositive_dt_rejected(self):
        with pytest.raises(ValueError):
            rk4_step(lambda x, u, w: x, np.zeros(1), None, None, 0.0)


class TestPidController:
    def test_equilibrium_returns_trim(self, trim):
        pid = PidAttitudeController(PidGains(), trim)
        out = pid.step(trim.state, trim.h_out_trim, 0.002)
        assert np.allclose(out, trim.inputs.as_vector()[0:3], atol=1e-14)

    def test_roll_step_converges_with_bounded_overshoot(self, params, trim):
        pid = PidAttitudeController(PidGains(), trim)
        x = trim.state.as_vector().copy()
        step = 0.05
        target = trim.h_out_trim + np.array([step, 0.0, 0.0])
        dt = 0.002
        hist = []
        for _ in range(int(5.0 / dt)):
            dlat, dlon, dped = pid.step(FullState.from_vector(x), target, dt)
            u = np.clip([dlat, dlon, dped, trim.inputs.delta_col], -1.0, 1.0)
            x = rk4_step(lambda xv, uv, wv: _state_derivative_flat(
                xv, u, np.zeros(3), params), x, None, None, dt)
            hist.append(x[6])
        hist = np.array(hist)
        final_err = abs(hist[-1] - target[0])
        overshoot = (hist.max() - target[0]) / step
        assert final_err < 0.01
        assert overshoot < 0.25

    def test_integrator_clamps(self, trim):
        gains = PidGains()
        pid = PidAttitudeController(gains, trim)
        x = trim.state.as_vector().copy()
        x[6] -= 1.0  # persistent huge roll error
        for _ in range(10000):
            pid.step(FullState.from_vector(x), trim.h_out_trim, 0.01)
        assert pid.int_roll == gains.int_limit


class TestReferences:
    def test_segment_selection_and_ramp(self):
        segs = (
            ReferenceSegment(0.0, np.array([0.0, 0.0, -10.0]), np.zeros(3)),
            ReferenceSegment(18.0, np.array([0.0, 0.0, -10.0]),
                             np.array([0.0, 0.0, -2.5])),
            ReferenceSegment(22.0, np.array([0.0, 0.0, -20.0]), np.zeros(3)),
        )
        assert reference_at(segs, 5.0).p_ref.pd == -10.0
        assert reference_at(segs, 20.0).p_ref.pd == pytest.approx(-15.0)
        assert reference_at(segs, 40.0).p_ref.pd == -20.0
        assert reference_at(segs, 19.0).v_ref[2] == -2.5

    def test_settled_mask_excludes_event_windows(self):
        cfg = builtin_scenario("paper-hover-climb", seed=0)
        t = np.arange(0.0, 60.0, 0.1)
        mask = settled_mask(t, cfg)
        for ev in (0.0, 18.0, 22.0):
            assert not mask[np.argmin(np.abs(t - (ev + 1.0)))]
            assert mask[np.argmin(np.abs(t - (ev + 2.5)))]


class TestScenarioValidation:
    def test_builtin_names_available(self):
        assert "paper-hover-climb" in builtin_names()
        assert "gust-attitude-hold" in builtin_names()

    def test_unknown_builtin_rejected(self):
        with pytest.raises(ConfigError):
            builtin_scenario("no-such-scenario")

    def test_bad_dt_rejected(self):
        cfg = builtin_scenario("hover-hold")
        cfg.dt = 0.05
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_unordered_segments_rejected(self):
        cfg = builtin_scenario("paper-hover-climb")
        cfg.references = tuple(reversed(cfg.references))
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_unknown_controller_rejected(self):
        cfg = builtin_scenario("hover-hold")
        cfg.controller = "lqr"
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_hinf_requires_artifacts(self, params, trim):
        cfg = builtin_scenario("gust-attitude-hold", seed=0)
        cfg.duration = 0.1
        with pytest.raises(ConfigError):
            run_scenario(cfg, params, SimArtifacts(trim=trim))


class TestRunScenario:
    def test_equilibrium_hold_open_loop(self, params, artifacts):
        cfg = builtin_scenario("hover-hold", seed=1)
        cfg.duration = 60.0
        log, _ = run_scenario(cfg, params, artifacts)
        dev = np.abs(log.states - artifacts.trim.state.as_vector()[None, :])
        assert np.max(dev) < 1e-6

    def test_equilibrium_hold_closed_loop(self, params, artifacts):
        cfg = builtin_scenario("hover-hold", seed=1)
        cfg.controller = "hinf"
        cfg.duration = 20.0
        log, _ = run_scenario(cfg, params, artifacts)
        dev = np.abs(log.states - artifacts.trim.state.as_vector()[None, :])
        assert np.max(dev) < 1e-6

    def test_log_shape_and_time_grid(self, params, artifacts):
        cfg = builtin_scenario("hover-hold", seed=1)
        cfg.duration = 1.0
        log, _ = run_scenario(cfg, params, artifacts)
        n = int(round(cfg.duration / cfg.dt)) + 1
        assert log.t.shape == (n,)
        assert log.states.shape == (n, 15)
        assert np.all(np.diff(log.t) > 0.0)
        assert log.t[0] == 0.0
        assert log.t[-1] == pytest.approx(cfg.duration)

    def test_deterministic_logs_byte_identical(self, params, artifacts,
                                               tmp_path):
        paths = []
        for k in range(2):
            cfg = builtin_scenario("gust-attitude-hold", seed=99)
            cfg.duration = 3.0
            log, _ = run_scenario(cfg, params, artifacts)
            p = tmp_path / f"run{k}.csv"
            log.to_csv(p)
            paths.append(p)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_csv_header_contract(self, params, artifacts, tmp_path):
        cfg = builtin_scenario("hover-hold", seed=1)
        cfg.duration = 0.1
        log, _ = run_scenario(cfg, params, artifacts)
        path = tmp_path / "log.csv"
        log.to_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == ("t,pn,pe,pd,vx,vy,vz,phi,theta,psi,p,q,r,a_s,b_s,xi,"
                          "dlat,dlon,dped,dcol,wind_u,wind_v,wind_w,"
                          "phi_ref,theta_ref,psi_ref,"
                          "est_a_s,est_b_s,est_dped,sat_flags")
        assert header == LOG_COLUMNS

    def test_csv_round_trips_at_full_precision(self, params, artifacts,
                                               tmp_path):
        cfg = builtin_scenario("gust-attitude-hold", seed=5)
        cfg.duration = 1.0
        log, _ = run_scenario(cfg, params, artifacts)
        path = tmp_path / "log.csv"
        log.to_csv(path)
        cols = read_log_csv(path)
        assert np.array_equal(cols["phi"], log.states[:, 6])
        assert np.array_equal(cols["dlat"], log.inputs[:, 0])
        assert np.array_equal(cols["wind_u"], log.wind[:, 0])

    def test_metrics_recomputable_from_csv(self, params, artifacts, tmp_path):
        cfg = builtin_scenario("paper-hover-climb", seed=7)
        cfg.duration = 25.0
        log, metrics = run_scenario(cfg, params, artifacts)
        path = tmp_path / "log.csv"
        log.to_csv(path)
        cols = read_log_csv(path)
        states = np.column_stack([cols[k] for k in
                                  ("pn", "pe", "pd", "vx", "vy", "vz",
                                   "phi", "theta", "psi", "p", "q", "r",
                                   "a_s", "b_s", "xi")])
        att_ref = np.column_stack([cols["phi_ref"], cols["theta_ref"],
                                   cols["psi_ref"]])
        again = compute_metrics(cols["t"], states, att_ref, cfg)
        for key, value in metrics.as_dict().items():
            assert again.as_dict()[key] == pytest.approx(value, abs=1e-9)

    def test_nonfinite_state_aborts_with_step(self, params, artifacts):
        cfg = builtin_scenario("hover-hold", seed=2)
        cfg.duration = 5.0
        cfg.wind = WindModel(mean=np.array([np.nan, 0.0, 0.0]))
        with pytest.raises(SimulationAbort) as info:
            run_scenario(cfg, params, artifacts)
        assert info.value.step == 1
        assert "step 1" in str(info.value)

    def test_roll_reference_offset_tracked_in_closed_loop(self, params,
                                                          artifacts):
        cfg = builtin_scenario("hover-hold", seed=1)
        cfg.controller = "hinf"
        cfg.duration = 2.0
        offset = 0.02
        cfg.att_ref = artifacts.trim.h_out_trim + np.array([offset, 0.0, 0.0])
        log, _ = run_scenario(cfg, params, artifacts)
        target = artifacts.trim.h_out_trim[0] + offset
        assert abs(log.states[-1, 6] - target) < 2e-3

    def test_outer_loop_regulates_initial_offset(self, params, artifacts):
        cfg = builtin_scenario("step-offset", seed=3)
        log, _ = run_scenario(cfg, params, artifacts)
        target = np.array([0.0, 0.0, -10.0])
        err = np.linalg.norm(log.states[-1, 0:3] - target)
        assert err < 0.1
        # no sustained oscillation growth over the last two thirds
        tail = np.linalg.norm(log.states[log.t > 10.0][:, 0:3] - target,
                              axis=1)
        assert np.max(tail) < 2.0


class TestCompare:
    def test_self_comparison_is_unity(self, params, artifacts):
        cfg = builtin_scenario("gust-attitude-hold", seed=21)
        cfg.duration = 5.0
        report, _, _ = compare_controllers(cfg, params, artifacts,
                                           controllers=("hinf", "hinf"))
        for key, value in report.ratios().items():
            if not math.isnan(value):
                assert value == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_denominator_reported_na(self, params, artifacts):
        cfg = builtin_scenario("hover-hold", seed=1)
        cfg.duration = 2.0
        report, _, _ = compare_controllers(cfg, params, artifacts,
                                           controllers=("open_loop",
                                                        "open_loop"))
        table = report.table()
        assert "n/a" in table

    def test_shared_wind_between_runs(self, params, artifacts):
        cfg = builtin_scenario("gust-attitude-hold", seed=13)
        cfg.duration = 2.0
        _, log_a, log_b = compare_controllers(cfg, params, artifacts)
        assert np.array_equal(log_a.wind, log_b.wind)
