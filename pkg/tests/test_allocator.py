import numpy as np
import pytest

from qcopies import (
    BudgetProblem,
    CopyAllocation,
    DegenerateProblemError,
    EIGHT_PHOTON_EXPERIMENT_COPIES,
    EIGHT_PHOTON_MEASURED_P,
    EIGHT_PHOTON_REPORTED_OPTIMUM,
    EIGHT_PHOTON_UNIFORM_COPIES,
    QcopiesError,
    SettingProbabilities,
    allocate_sc,
    allocate_tomography_nonorthogonal,
    allocate_tomography_orthogonal,
    sc_variance_weights,
    solve_budget,
)
from qcopies.allocator import nonorthogonal_effective_weights

from _oracles import minimize_budget_numeric


class TestSolveBudget:
    def test_symmetric_split(self):
        alloc = solve_budget(BudgetProblem(k=np.full(5, 0.01), epsilon=0.001))
        assert alloc.real_t == pytest.approx([50.0] * 5, rel=1e-12)
        assert list(alloc.t) == [50] * 5
        assert alloc.total == 250

    def test_hand_value_eight_qubit_profile(self):
        # P1=0.8, Pj=0.2 at n=8 gives k1=0.04 and kj=0.0025
        k = np.array([0.04] + [0.0025] * 8)
        alloc = solve_budget(BudgetProblem(k=k, epsilon=0.016**2))
        assert alloc.real_t[0] == pytest.approx(468.75, rel=1e-12)
        assert alloc.real_t[1] == pytest.approx(117.1875, rel=1e-12)
        assert list(alloc.t) == [469] + [118] * 8

    def test_halving_budget_doubles_counts(self, rng):
        k = rng.uniform(0.001, 0.05, size=6)
        a1 = solve_budget(BudgetProblem(k=k, epsilon=0.002))
        a2 = solve_budget(BudgetProblem(k=k, epsilon=0.001))
        assert a2.real_t == pytest.approx(2 * a1.real_t, rel=1e-12)

    def test_zero_weight_settings_get_t_min(self):
        alloc = solve_budget(BudgetProblem(k=np.array([0.01, 0.0, 0.02]), epsilon=1e-3),
                             t_min=3)
        assert alloc.t[1] == 3
        assert alloc.real_t[1] == 0.0

    def test_all_zero_degenerate(self):
        with pytest.raises(DegenerateProblemError):
            solve_budget(BudgetProblem(k=np.zeros(4), epsilon=1e-3))

    def test_bad_epsilon(self):
        with pytest.raises(QcopiesError):
            BudgetProblem(k=np.array([0.01]), epsilon=0.0)

    def test_constraint_tight_before_and_satisfied_after_rounding(self, rng):
        for _ in range(50):
            m = int(rng.integers(2, 13))
            k = rng.uniform(1e-4, 0.06, size=m)
            eps = float(rng.uniform(1e-4, 1e-2))
            alloc = solve_budget(BudgetProblem(k=k, epsilon=eps))
            assert np.sum(k / alloc.real_t) == pytest.approx(eps, abs=1e-9 * eps + 1e-15)
            assert np.sum(k / alloc.t) <= eps * (1 + 1e-9)

    def test_oracle_equivalence(self, rng):
        # closed form vs independent numeric constrained minimizer
        for _ in range(200):
            m = int(rng.integers(2, 13))
            k = rng.uniform(1e-4, 0.06, size=m)
            eps = float(rng.uniform(1e-4, 1e-2))
            alloc = solve_budget(BudgetProblem(k=k, epsilon=eps))
            t_num = minimize_budget_numeric(k, eps)
            assert np.max(np.abs(alloc.real_t - t_num) / t_num) < 1e-3
            assert abs(alloc.real_t.sum() - t_num.sum()) / t_num.sum() < 1e-4

    def test_ratio_law(self, rng):
        k = rng.uniform(1e-4, 0.05, size=8)
        alloc = solve_budget(BudgetProblem(k=k, epsilon=1e-3))
        for i in range(8):
            for j in range(8):
                assert alloc.real_t[i] / alloc.real_t[j] == pytest.approx(
                    np.sqrt(k[i] / k[j]), abs=1e-9)

    def test_monotone_in_weights(self, rng):
        k = rng.uniform(1e-3, 0.05, size=6)
        base = solve_budget(BudgetProblem(k=k, epsilon=1e-3)).real_t
        for j in range(6):
            bumped = k.copy()
            bumped[j] *= 1.5
            grown = solve_budget(BudgetProblem(k=bumped, epsilon=1e-3)).real_t
            assert np.all(grown >= base - 1e-9)


class TestAllocateSc:
    def test_pure_state_degenerate_gets_t_min(self):
        p = SettingProbabilities(n=2, P=np.array([1.0, 0.0, 1.0]))
        alloc = allocate_sc(p, epsilon0=0.01, t_min=2)
        assert list(alloc.t) == [2, 2, 2]

    def test_measured_eight_photon_values_match_oracle(self):
        p = SettingProbabilities(n=8, P=np.asarray(EIGHT_PHOTON_MEASURED_P))
        alloc = allocate_sc(p, epsilon0=0.016)
        t_num = minimize_budget_numeric(sc_variance_weights(p), 0.016**2)
        assert np.max(np.abs(alloc.t - np.ceil(t_num))) <= 1
        # closed form puts ~458 copies on the computational setting here
        assert abs(alloc.real_t[0] - 458.0) < 1.0

    def test_reference_distributions(self):
        assert sum(EIGHT_PHOTON_EXPERIMENT_COPIES) == 1305
        assert sum(EIGHT_PHOTON_UNIFORM_COPIES) == 1305
        assert sum(EIGHT_PHOTON_REPORTED_OPTIMUM) == 1253
        assert EIGHT_PHOTON_REPORTED_OPTIMUM[0] == 415

    def test_never_worse_than_best_uniform(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 9))
            P = rng.uniform(0.05, 0.95, size=n + 1)
            p = SettingProbabilities(n=n, P=P)
            eps0 = float(rng.uniform(0.005, 0.05))
            alloc = allocate_sc(p, epsilon0=eps0)
            k = sc_variance_weights(p)
            per_setting = int(np.ceil(k.sum() / eps0**2))
            assert alloc.total <= per_setting * (n + 1)


class TestTomographyOrthogonal:
    def test_all_frequencies_deterministic_degenerate(self):
        with pytest.raises(DegenerateProblemError):
            allocate_tomography_orthogonal([np.array([1.0, 0.0, 0.0, 0.0])], epsilon0=0.05)

    def test_uniform_single_setting(self):
        d = 8
        freqs = [np.full(d, 1 / d)]
        alloc = allocate_tomography_orthogonal(freqs, epsilon0=0.1)
        k = (d - 1) / d
        assert alloc.real_t[0] == pytest.approx(k / 0.1**2, rel=1e-12)

    def test_equal_weights_equal_counts(self):
        freqs = [np.array([0.5, 0.5]), np.array([0.5, 0.5]), np.array([0.5, 0.5])]
        alloc = allocate_tomography_orthogonal(freqs, epsilon0=0.05)
        assert alloc.t[0] == alloc.t[1] == alloc.t[2]

    def test_norm_weighting(self):
        freqs = [np.array([0.5, 0.5]), np.array([0.5, 0.5])]
        norms = [np.array([1.0, 1.0]), np.array([4.0, 4.0])]
        alloc = allocate_tomography_orthogonal(freqs, m_norms=norms, epsilon0=0.05)
        assert alloc.real_t[1] == pytest.approx(2 * alloc.real_t[0], rel=1e-12)

    def test_rejects_bad_frequencies(self):
        with pytest.raises(QcopiesError):
            allocate_tomography_orthogonal([np.array([1.2, -0.2])], epsilon0=0.05)


class TestTomographyNonorthogonal:
    def test_diagonal_reduces_to_orthogonal(self):
        km = np.diag([0.02, 0.01, 0.04])
        alloc = allocate_tomography_nonorthogonal(km, epsilon0=0.05)
        direct = solve_budget(BudgetProblem(k=np.array([0.02, 0.01, 0.04]), epsilon=0.05**2))
        assert list(alloc.t) == list(direct.t)

    def test_two_by_two_effective_weights(self):
        km = np.array([[0.02, 0.005], [0.005, 0.01]])
        eff = nonorthogonal_effective_weights(km)
        assert eff == pytest.approx([0.025, 0.015], abs=1e-15)

    def test_bilinear_constraint_holds(self, rng):
        for _ in range(20):
            m = int(rng.integers(2, 6))
            km = rng.uniform(0, 0.02, size=(m, m))
            eps0 = float(rng.uniform(0.02, 0.1))
            alloc = allocate_tomography_nonorthogonal(km, epsilon0=eps0)
            roots = np.sqrt(alloc.t.astype(float))
            assert np.sum(km / np.outer(roots, roots)) <= eps0**2 * (1 + 1e-9)

    def test_all_zero_matrix_degenerate(self):
        with pytest.raises(DegenerateProblemError):
            allocate_tomography_nonorthogonal(np.zeros((3, 3)), epsilon0=0.05)


class TestCopyAllocationType:
    def test_budget_problem_json_round_trip(self):
        prob = BudgetProblem(k=np.array([0.01, 0.02]), epsilon=1e-3)
        back = BudgetProblem.from_json(prob.to_json())
        assert back.epsilon == prob.epsilon
        assert back.k == pytest.approx(prob.k, abs=0)

    def test_json_round_trip(self):
        alloc = solve_budget(BudgetProblem(k=np.array([0.01, 0.02]), epsilon=1e-3))
        back = CopyAllocation.from_json(alloc.to_json())
        assert list(back.t) == list(alloc.t)
        assert back.epsilon0 == alloc.epsilon0
        assert back.real_t == pytest.approx(alloc.real_t, abs=0)

    def test_rejects_zero_counts(self):
        with pytest.raises(QcopiesError):
            CopyAllocation(t=np.array([0, 5]), epsilon0=0.1, real_t=np.array([0.0, 5.0]))
