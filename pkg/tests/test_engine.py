import numpy as np
import pytest
import scipy.stats

from klever.engine import (CANONICAL_LEVERS, K_STAR, RunConfig, ScenarioSpec,
                           apply_shock, run_ensemble, sample_next_shock,
                           sample_paths, simulate_path)
from klever.model import CapitalState, LeverVector, effective_params, flow
from klever.rng import SplitMix64
from oracles import expm_flow


def scenario(name, params, **cfg):
    defaults = dict(n_paths=200, horizon=10.0, record_dt=0.1, master_seed=42)
    defaults.update(cfg)
    return ScenarioSpec(name, CANONICAL_LEVERS[name], RunConfig(**defaults))


class TestSampleNextShock:
    def test_all_rates_zero(self):
        assert sample_next_shock((0.0, 0.0, 0.0), SplitMix64.for_path(1, 0)) is None

    def test_exponential_mean_and_ks(self):
        rng = SplitMix64.for_path(5, 0)
        waits = np.array([sample_next_shock((2.0, 0.0, 0.0), rng)[1]
                          for _ in range(100_000)])
        assert abs(waits.mean() - 0.5) / 0.5 < 0.02
        ks = scipy.stats.kstest(waits, "expon", args=(0, 0.5))
        assert ks.pvalue > 0.01

    def test_superposition_thinning(self):
        rng = SplitMix64.for_path(6, 0)
        comps = [sample_next_shock((1.0, 3.0, 0.0), rng)[0]
                 for _ in range(100_000)]
        freq_s = comps.count("s") / len(comps)
        assert abs(freq_s - 0.75) <= 0.01

    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            sample_next_shock((-1.0, 0.0, 0.0), SplitMix64.for_path(1, 0))


class TestApplyShock:
    def test_subtraction(self):
        out = apply_shock(CapitalState(50, 50, 50), "h", 8.0)
        assert (out.h, out.s, out.r) == (42.0, 50.0, 50.0)

    def test_clamp_at_zero(self):
        out = apply_shock(CapitalState(5, 50, 50), "h", 8.0)
        assert (out.h, out.s, out.r) == (0.0, 50.0, 50.0)

    def test_zero_magnitude_identity(self):
        s = CapitalState(50, 50, 50)
        out = apply_shock(s, "r", 0.0)
        assert (out.h, out.s, out.r) == (s.h, s.s, s.r)

    def test_unknown_component(self):
        with pytest.raises(ValueError):
            apply_shock(CapitalState(50, 50, 50), "x", 1.0)


class TestSimulatePath:
    def test_deterministic_trajectory_matches_oracle(self, generic_params):
        p = generic_params
        quiet = effective_params(p, LeverVector())
        quiet = type(quiet)(**{**quiet.__dict__, "nu_h": 0.0, "nu_s": 0.0,
                               "nu_r": 0.0})
        cfg = RunConfig(n_paths=1, horizon=10.0, record_dt=0.1, master_seed=0)
        rec = simulate_path(quiet, p.init, p.weights, cfg, SplitMix64.for_path(0, 0))
        w = np.array([p.weights.w_h, p.weights.w_s, p.weights.w_r])
        init = (p.init.h, p.init.s, p.init.r)
        for tg, kv in zip(rec.grid, rec.k_series):
            want = w @ expm_flow(quiet, init, tg)
            assert kv == pytest.approx(want, abs=1e-8)
        assert rec.shock_log == []

    def test_fixed_point_constant_series(self):
        from klever.model import EffectiveParams, Weights
        eff = EffectiveParams(alpha_h=5.0, delta_h=0.1, beta=0.1, gamma_s=0.2,
                              alpha_r=6.0, delta_r=0.12, nu_h=0, nu_s=0, nu_r=0,
                              j_h=0, j_s=0, j_r=0)
        init = CapitalState(50.0, 25.0, 50.0)  # (a_h/d_h, b*50/g, a_r/d_r)
        cfg = RunConfig(n_paths=1, horizon=10.0, record_dt=0.5, master_seed=0)
        rec = simulate_path(eff, init, Weights(), cfg, SplitMix64.for_path(0, 0))
        assert np.allclose(rec.k_series, rec.k_series[0], atol=1e-9)

    def test_bit_identical_given_same_stream(self, generic_params):
        p = generic_params
        eff = effective_params(p, LeverVector())
        cfg = RunConfig(n_paths=1, horizon=10.0, record_dt=0.1, master_seed=3)
        a = simulate_path(eff, p.init, p.weights, cfg, SplitMix64.for_path(3, 0))
        b = simulate_path(eff, p.init, p.weights, cfg, SplitMix64.for_path(3, 0))
        assert np.array_equal(a.k_series, b.k_series)
        assert a.shock_log == b.shock_log
        assert a.terminal_state == b.terminal_state


class TestRunEnsemble:
    def test_single_path_degenerate(self, generic_params):
        p = generic_params
        spec = scenario("baseline", p, n_paths=1)
        res = run_ensemble(spec, p)
        eff = effective_params(p, spec.levers)
        rec = simulate_path(eff, p.init, p.weights, spec.run,
                            SplitMix64.for_path(spec.run.master_seed, 0))
        assert np.array_equal(res.mean_k_series, rec.k_series)
        assert np.array_equal(res.p05_series, rec.k_series)
        assert res.terminal_k[0] == rec.k_series[-1]

    def test_kernel_matches_reference_paths(self, generic_params):
        p = generic_params
        spec = scenario("full_klrm", p, n_paths=40)
        res = run_ensemble(spec, p)
        eff = effective_params(p, spec.levers)
        for i in range(40):
            rec = simulate_path(eff, p.init, p.weights, spec.run,
                                SplitMix64.for_path(spec.run.master_seed, i))
            assert res.terminal_k[i] == rec.k_series[-1]
            assert res.terminal_h[i] == rec.terminal_state.h
            assert res.terminal_s[i] == rec.terminal_state.s
            assert res.terminal_r[i] == rec.terminal_state.r
            assert res.min_k[i] == rec.k_series.min()

    def test_worker_count_does_not_change_results(self, generic_params, monkeypatch):
        p = generic_params
        spec = scenario("baseline", p, n_paths=500)
        monkeypatch.setenv("KLEVER_THREADS", "1")
        a = run_ensemble(spec, p)
        monkeypatch.setenv("KLEVER_THREADS", "8")
        b = run_ensemble(spec, p)
        for f in ("terminal_k", "terminal_h", "terminal_s", "terminal_r",
                  "min_k", "mean_k_series", "p05_series", "p95_series",
                  "crisis_curve"):
            assert np.array_equal(getattr(a, f), getattr(b, f)), f

    def test_shock_replay_bit_exact(self, generic_params):
        # terminal state is exactly the flow composition across logged shocks
        p = generic_params
        eff = effective_params(p, LeverVector())
        cfg = RunConfig(n_paths=1, horizon=10.0, record_dt=0.1, master_seed=9)
        for i in range(25):
            rec = simulate_path(eff, p.init, p.weights, cfg,
                                SplitMix64.for_path(9, i))
            state = p.init
            t = 0.0
            for (t_ev, comp, mag) in rec.shock_log:
                state = flow(state, eff, t_ev - t)
                state = apply_shock(state, comp, mag)
                t = t_ev
            state = flow(state, eff, cfg.horizon - t)
            assert state == rec.terminal_state

    def test_no_jumps_no_crisis(self, generic_params):
        p = generic_params
        quiet = type(p)(**{**p.__dict__, "j_h": 0.0, "j_s": 0.0, "j_r": 0.0})
        res = run_ensemble(scenario("baseline", quiet, n_paths=50), quiet)
        # deterministic trajectory stays above K*: shocks exist but cost 0
        assert res.mean_k_series.min() > K_STAR
        assert (res.crisis_curve == 0.0).all()

    def test_common_random_numbers_monotone_in_levers(self, generic_params):
        p = generic_params
        cfg = RunConfig(n_paths=200, horizon=10.0, record_dt=0.5, master_seed=17)
        base = LeverVector(0.3, 0.3, 0.3, 0.3)
        res0 = run_ensemble(ScenarioSpec("base", base, cfg), p)
        for field in ("lambda_p", "lambda_m", "lambda_pr", "lambda_r"):
            raised = LeverVector(**{**base.__dict__, field: 0.4})
            res1 = run_ensemble(ScenarioSpec("up", raised, cfg), p)
            assert (res1.terminal_k >= res0.terminal_k - 1e-12).all(), field

    def test_path_count_convergence(self, generic_params):
        p = generic_params
        a = run_ensemble(scenario("baseline", p, n_paths=5000, master_seed=1), p)
        b = run_ensemble(scenario("baseline", p, n_paths=20000, master_seed=2), p)
        se = np.std(a.terminal_k, ddof=1) / np.sqrt(5000)
        assert abs(a.terminal_k.mean() - b.terminal_k.mean()) < 4 * se

    def test_terminal_stats_independent_of_record_dt(self, generic_params):
        p = generic_params
        fine = run_ensemble(scenario("baseline", p, n_paths=100, record_dt=0.1), p)
        coarse = run_ensemble(scenario("baseline", p, n_paths=100, record_dt=10.0), p)
        assert np.array_equal(fine.terminal_k, coarse.terminal_k)

    def test_sample_paths_match_ensemble_streams(self, generic_params):
        p = generic_params
        spec = scenario("baseline", p, n_paths=10)
        res = run_ensemble(spec, p)
        recs = sample_paths(p, spec.levers, spec.run, 10)
        for i, rec in enumerate(recs):
            assert rec.k_series[-1] == res.terminal_k[i]


class TestRunConfig:
    def test_grid_shape(self):
        cfg = RunConfig(n_paths=1, horizon=10.0, record_dt=0.1, master_seed=0)
        grid = cfg.grid_times()
        assert len(grid) == 101
        assert grid[0] == 0.0 and grid[-1] == 10.0
        assert np.allclose(np.diff(grid), 0.1)

    def test_validation(self):
        with pytest.raises(ValueError):
            RunConfig(n_paths=0)
        with pytest.raises(ValueError):
            RunConfig(horizon=0.0)
        with pytest.raises(ValueError):
            RunConfig(record_dt=11.0)
