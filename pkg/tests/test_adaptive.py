import numpy as np
import pytest

from qcopies import (
    AdaptiveConfig,
    ConfigError,
    RngSeed,
    allocate_sc,
    build_settings,
    depolarized_sc,
    geometric_schedule,
    protocol_timeline,
    run_adaptive,
    setting_probabilities,
    sweep_epsilon_ratio,
)
from qcopies.adaptive import AdaptiveState, RoundRecord


class TestSchedule:
    def test_geometric_passes_final(self):
        assert geometric_schedule(0.01, 0.1, 0.0003) == pytest.approx((0.01, 0.001, 0.0001))
        assert geometric_schedule(0.01, 0.1, 1e-5) == pytest.approx(
            (0.01, 0.001, 1e-4, 1e-5))
        assert len(geometric_schedule(0.01, 0.2, 0.0003)) == 4

    def test_validation(self):
        with pytest.raises(ConfigError):
            AdaptiveConfig(epsilon_schedule=())
        with pytest.raises(ConfigError):
            AdaptiveConfig(epsilon_schedule=(0.01, 0.02))
        with pytest.raises(ConfigError):
            AdaptiveConfig(epsilon_schedule=(0.01, -0.001))
        with pytest.raises(ConfigError):
            geometric_schedule(0.01, 1.2, 0.0001)


class TestRunAdaptive:
    def test_single_round_equals_one_shot_allocation(self):
        # with a one-entry schedule, known priors, no pilot and no top-ups,
        # the protocol is exactly allocate once + sample once
        n = 3
        wd = build_settings(n)
        rho = depolarized_sc(n, 0.75)
        p_true = setting_probabilities(rho, wd)
        cfg = AdaptiveConfig(epsilon_schedule=(4e-4,), initial_P=p_true.P,
                             t_initial=0, refine_within_round=False)
        state = run_adaptive(rho, wd, cfg, RngSeed(5).generator())
        oneshot = allocate_sc(p_true, epsilon0=np.sqrt(4e-4))
        assert list(state.cumulative_t) == list(oneshot.t)
        assert state.round == 1

    def test_monotone_cumulative_and_nonnegative_increments(self):
        n = 4
        wd = build_settings(n)
        rho = depolarized_sc(n, 0.9374)
        cfg = AdaptiveConfig.geometric(0.01, 0.1, 1e-4)
        state = run_adaptive(rho, wd, cfg, RngSeed(2).generator())
        prev = np.zeros(n + 1, dtype=np.int64)
        for rec in state.rounds:
            assert np.all(rec.increments >= 0)
            assert np.all(rec.cumulative_t >= prev)
            prev = rec.cumulative_t

    def test_determinism(self):
        n = 3
        wd = build_settings(n)
        rho = depolarized_sc(n, 0.8)
        cfg = AdaptiveConfig.geometric(0.01, 0.1, 1e-4)
        s1 = run_adaptive(rho, wd, cfg, RngSeed(9).generator())
        s2 = run_adaptive(rho, wd, cfg, RngSeed(9).generator())
        assert list(s1.cumulative_t) == list(s2.cumulative_t)
        assert s1.current_P == pytest.approx(s2.current_P, abs=0)

    def test_final_spread_below_budget(self):
        n = 2
        wd = build_settings(n)
        rho = depolarized_sc(n, 0.8)
        cfg = AdaptiveConfig.geometric(0.01, 0.1, 1e-4)
        for seed in range(5):
            state = run_adaptive(rho, wd, cfg, RngSeed(seed).generator())
            assert state.fidelity_std <= np.sqrt(1e-4) * (1 + 1e-6)

    def test_estimates_converge_to_truth(self):
        # final estimates within 3 binomial sigmas of the true values in
        # at least 95 of 100 seeded runs
        n = 2
        wd = build_settings(n)
        rho = depolarized_sc(n, 0.8)
        p_true = setting_probabilities(rho, wd).P
        cfg = AdaptiveConfig.geometric(0.01, 0.1, 1e-4)
        hits = 0
        for seed in range(100):
            state = run_adaptive(rho, wd, cfg, RngSeed(1000 + seed).generator())
            t = state.cumulative_t.astype(float)
            sigma = np.sqrt(p_true * (1 - p_true) / t)
            hits += bool(np.all(np.abs(state.current_P - p_true) <= 3 * sigma))
        assert hits >= 95

    def test_round_budgets_met_by_cumulative_counts(self):
        from qcopies import SettingProbabilities, delta_f

        n = 4
        wd = build_settings(n)
        rho = depolarized_sc(n, 0.9374)
        cfg = AdaptiveConfig.geometric(0.01, 0.1, 1e-4)
        state = run_adaptive(rho, wd, cfg, RngSeed(21).generator())
        for rec in state.rounds:
            clamped = np.clip(rec.P_hat, 1 / rec.cumulative_t, 1 - 1 / rec.cumulative_t)
            spread = delta_f(SettingProbabilities(n=n, P=clamped),
                             rec.cumulative_t.astype(float))
            assert spread <= np.sqrt(rec.epsilon) * (1 + 1e-6)

    def test_history_csv_shape(self):
        n = 2
        wd = build_settings(n)
        state = run_adaptive(depolarized_sc(n, 0.8), wd,
                             AdaptiveConfig.geometric(0.01, 0.1, 1e-3),
                             RngSeed(3).generator())
        lines = state.history_csv().strip().split("\n")
        assert lines[0] == "round,epsilon,setting,increment,cumulative,P_hat"
        assert len(lines) == 1 + state.round * (n + 1)


class TestSweep:
    def test_single_ratio_single_row(self):
        wd = build_settings(2)
        rho = depolarized_sc(2, 0.9)
        res = sweep_epsilon_ratio(rho, wd, [0.1], repeats=3, rng=RngSeed(4))
        assert len(res.rows) == 1
        assert res.rows[0].ratio == 0.1
        assert res.rows[0].mean_rounds == 3.0

    def test_rounds_track_schedule_length(self):
        wd = build_settings(2)
        rho = depolarized_sc(2, 0.9)
        res = sweep_epsilon_ratio(rho, wd, [0.1, 0.2], repeats=2, rng=RngSeed(4))
        assert res.rows[0].mean_rounds == 3.0
        assert res.rows[1].mean_rounds == 4.0


class TestTimeline:
    def _one_round_state(self, t):
        t = np.asarray(t, dtype=np.int64)
        rec = RoundRecord(index=1, epsilon=2.56e-4, P_used=np.full(t.size, 0.5),
                          target_t=t, increments=t, cumulative_t=t,
                          P_hat=np.full(t.size, 0.5))
        return AdaptiveState(n=t.size - 1, rounds=[rec], cumulative_t=t,
                             current_P=np.full(t.size, 0.5))

    def test_zero_switch_cost_time_tracks_copies(self):
        state = self._one_round_state([100, 50, 50, 50, 50, 50, 50, 50, 50])
        rep = protocol_timeline(state, switch_cost_hours=0.0, copy_rate_per_hour=10.0)
        assert rep.adaptive_total_hours == pytest.approx(state.total_copies / 10.0)

    def test_hours_saved_against_reference_experiment(self):
        # 1253 optimized vs 1305 at 8.88 copies/hour recovers ~5.9 hours
        state = self._one_round_state([415, 106, 103, 106, 103, 108, 101, 108, 103])
        rep = protocol_timeline(state, switch_cost_hours=2 / 60, copy_rate_per_hour=8.88,
                                baseline_total=1305)
        assert rep.prep_hours_saved == pytest.approx(52 / 8.88, abs=1e-9)
        assert rep.prep_hours_saved == pytest.approx(5.9, abs=0.1)

    def test_switch_count_multiplies_with_rounds(self):
        n = 4
        wd = build_settings(n)
        rho = depolarized_sc(n, 0.9374)
        state = run_adaptive(rho, wd, AdaptiveConfig.geometric(0.01, 0.1, 1e-4),
                             RngSeed(31).generator())
        rep = protocol_timeline(state, switch_cost_hours=2 / 60, copy_rate_per_hour=8.88)
        ratio = rep.adaptive_switches / rep.single_pass_switches
        assert 2.0 <= ratio <= 6.0

    def test_bad_rate_rejected(self):
        state = self._one_round_state([10, 10, 10])
        with pytest.raises(Exception):
            protocol_timeline(state, switch_cost_hours=0.1, copy_rate_per_hour=0.0)
