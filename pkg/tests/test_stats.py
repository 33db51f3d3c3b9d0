import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpbandit.core import BERNOULLI, RewardModel, RunRecord, UniformRandomPolicy, \
    generate_tableau, interact_tableau
from dpbandit.stats import (
    MaxInfoParams,
    adaptive_t_statistic,
    adaptive_t_test,
    corrected_test,
    estimate_bias,
    hoeffding_width,
    ks_uniform_distance,
    max_info_bound,
    most_pulled_arm,
    norm_cdf,
    pvalue_correction,
    z_test_coefficient,
)


class TestHoeffdingWidth:
    def test_unit_log_case(self):
        # delta = 2/e makes ln(2/delta) = 1, so width = sqrt(1/(2n)) = 0.5 at n=2
        assert hoeffding_width(2, 2.0 / math.e) == pytest.approx(0.5)

    def test_quarter_sample_doubles_width(self):
        assert hoeffding_width(25, 0.05) == pytest.approx(
            2.0 * hoeffding_width(100, 0.05))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            hoeffding_width(0, 0.05)
        with pytest.raises(ValueError):
            hoeffding_width(10, 1.0)

    def test_empirical_coverage_bernoulli(self):
        n, delta, trials = 100, 0.05, 100_000
        width = hoeffding_width(n, delta)
        rng = np.random.default_rng(314)
        means = (rng.random((trials, n)) < 0.5).mean(axis=1)
        assert np.mean(np.abs(means - 0.5) >= width) <= delta


class TestEstimateBias:
    def _runs(self, model, reps, seed0):
        runs = []
        for rep in range(reps):
            tab = generate_tableau(model, 60, model.K, seed=(seed0, rep, 1))
            runs.append(interact_tableau(
                tab, UniformRandomPolicy(model.K, seed=(seed0, rep, 2))))
        return runs

    def test_nonadaptive_gathering_cis_cover_zero(self):
        model = RewardModel(BERNOULLI, arm_means=(0.3, 0.6, 0.9))
        report = estimate_bias(self._runs(model, 400, 17), model)
        assert report.K == 3
        for arm in range(3):
            assert report.ci_lo[arm] <= 0.0 <= report.ci_hi[arm]

    def test_aggregate_is_mean_of_abs(self):
        model = RewardModel(BERNOULLI, arm_means=(0.4, 0.8))
        report = estimate_bias(self._runs(model, 50, 3), model)
        assert report.aggregate_abs_bias == pytest.approx(
            np.abs(report.bias).mean())

    def test_never_pulled_arm_reported_absent(self):
        model = RewardModel(BERNOULLI, arm_means=(0.5, 0.5))
        runs = [RunRecord.from_run([0, 0], [1.0, 0.0], K=2) for _ in range(5)]
        report = estimate_bias(runs, model)
        assert math.isnan(report.bias[1])
        assert report.n_reps[1] == 0
        assert not math.isnan(report.aggregate_abs_bias)

    def test_requires_two_runs(self):
        model = RewardModel(BERNOULLI, arm_means=(0.5,))
        with pytest.raises(ValueError):
            estimate_bias([RunRecord.from_run([0], [1.0], K=1)], model)

    def test_csv_headers(self, tmp_path):
        model = RewardModel(BERNOULLI, arm_means=(0.4, 0.8))
        report = estimate_bias(self._runs(model, 20, 4), model)
        path = tmp_path / "bias.csv"
        report.to_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == "arm,bias,se,ci_lo,ci_hi,n_reps"


class TestZTest:
    def test_estimate_at_null_gives_p_one(self):
        X = np.eye(4)
        Y = np.zeros(4)
        result = z_test_coefficient(X, Y, 0, 0.0, 1.0)
        assert result.statistic == 0.0
        assert result.p_value == pytest.approx(1.0)

    def test_critical_value_maps_to_five_percent(self):
        # z = 1.959964 gives p ~ .05 (erf oracle)
        X = np.array([[1.0]])
        Y = np.array([1.959964])
        result = z_test_coefficient(X, Y, 0, 0.0, 1.0)
        assert result.p_value == pytest.approx(0.05, abs=1e-6)

    def test_identity_design_unit_response(self):
        X = np.eye(3)
        Y = np.array([0.0, 1.0, 0.0])
        result = z_test_coefficient(X, Y, 1, 0.0, 1.0)
        assert result.statistic == pytest.approx(1.0)

    def test_rank_deficient_design_rejected(self):
        X = np.ones((5, 2))
        Y = np.zeros(5)
        with pytest.raises(ValueError, match="untestable"):
            z_test_coefficient(X, Y, 0)

    def test_known_sigma_scales_statistic(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((30, 2))
        Y = rng.standard_normal(30)
        z1 = z_test_coefficient(X, Y, 0, 0.0, 1.0).statistic
        z2 = z_test_coefficient(X, Y, 0, 0.0, 2.0).statistic
        assert z1 == pytest.approx(2.0 * z2)


class TestMaxInformation:
    def test_zero_eps_gives_zero_bits(self):
        assert max_info_bound(0.0, 1000, 0.5) == 0.0
        assert max_info_bound(0.0, 1000, 0.0) == 0.0  # beta unused at eps=0

    def test_strictly_increasing_in_eps_and_T(self):
        ks_eps = [max_info_bound(e, 500, 0.01) for e in (0.01, 0.1, 0.5, 1.0)]
        assert all(np.diff(ks_eps) > 0)
        ks_T = [max_info_bound(0.1, T, 0.01) for T in (10, 100, 1000)]
        assert all(np.diff(ks_T) > 0)

    def test_eps_inverse_root_T_is_scale_free(self):
        beta = 0.05
        expect = math.log2(math.e) * (0.5 + math.sqrt(math.log(2 / beta) / 2))
        for T in (100, 10_000):
            got = max_info_bound(1.0 / math.sqrt(T), T, beta)
            assert got == pytest.approx(expect, rel=1e-12)

    def test_beta_domain_enforced_when_private(self):
        with pytest.raises(ValueError):
            max_info_bound(0.5, 100, 0.0)


class TestCorrection:
    def test_no_adaptivity_returns_alpha(self):
        assert pvalue_correction(0.05, 0.0, 0.0) == 0.05

    def test_alpha_below_beta_clamps_to_zero(self):
        assert pvalue_correction(0.01, 0.05, 1.0) == 0.0

    def test_direct_evaluation(self):
        assert pvalue_correction(0.05, 0.01, 2.0) == pytest.approx(0.01)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 50))
    @settings(max_examples=300, deadline=None)
    def test_monotonicity(self, alpha, beta, k):
        gamma = pvalue_correction(alpha, beta, k)
        assert 0.0 <= gamma <= max(alpha, 0.0) + 1e-15
        assert pvalue_correction(min(alpha + 0.1, 1.0), beta, k) >= gamma
        assert pvalue_correction(alpha, beta, k + 1.0) <= gamma
        assert pvalue_correction(alpha, min(beta + 0.1, 1.0), k) <= gamma

    def test_corrected_test_attaches_threshold(self):
        raw = z_test_coefficient(np.eye(2), np.array([0.5, 0.0]), 0)
        done = corrected_test(raw, eps=0.0, T=500, beta=0.0, alpha=0.05)
        assert done.corrected_threshold == pytest.approx(0.05)
        assert done.reject_raw == (raw.p_value <= 0.05)
        assert done.reject_corrected == (raw.p_value <= 0.05)

    def test_threshold_never_exceeds_alpha(self):
        raw = z_test_coefficient(np.eye(2), np.array([2.5, 0.0]), 0)
        for eps in (0.01, 0.1, 1.0):
            done = corrected_test(raw, eps, 500, 0.01, 0.05)
            assert done.corrected_threshold <= 0.05

    def test_max_info_params_gamma(self):
        params = MaxInfoParams(eps=0.0, T=500, beta=0.0)
        assert params.gamma(0.05) == 0.05

    def test_result_serialization(self):
        import json as _json

        raw = z_test_coefficient(np.eye(2), np.array([0.5, 0.0]), 0)
        done = corrected_test(raw, 0.1, 500, 0.01, 0.05)
        blob = _json.loads(done.to_json())
        assert blob["p_value"] == pytest.approx(raw.p_value)
        assert blob["reject_corrected"] in (True, False)
        row = done.to_csv_row()
        assert row.count(",") == 5
        assert row.endswith(done.descriptor)


class TestAdaptiveStatistic:
    def test_all_rewards_at_null_mean_gives_zero(self):
        record = RunRecord.from_run([0, 0, 1], [0.5, 0.5, 0.5], K=2)
        assert adaptive_t_statistic(record, 0.5) == pytest.approx(0.0)

    def test_hand_computed_value(self):
        # N=4, sum=3, mu0=.5: (3 - 2)/2 = 0.5
        record = RunRecord.from_run([0, 0, 0, 0], [1.0, 1.0, 1.0, 0.0], K=1)
        assert adaptive_t_statistic(record, 0.5) == pytest.approx(0.5)

    def test_invariant_to_relabeling_other_arms(self):
        rec_a = RunRecord.from_run([0, 0, 1, 2], [1, 1, 0, 1], K=3)
        rec_b = RunRecord.from_run([0, 0, 2, 1], [1, 1, 1, 0], K=3)
        assert adaptive_t_statistic(rec_a, 0.4) == adaptive_t_statistic(
            rec_b, 0.4)

    def test_most_pulled_tie_breaks_low(self):
        record = RunRecord.from_run([1, 0, 0, 1], [1, 1, 0, 0], K=2)
        assert most_pulled_arm(record) == 0

    def test_adaptive_t_test_p_value(self):
        record = RunRecord.from_run([0, 0, 0, 0], [1.0, 1.0, 1.0, 0.0], K=1)
        result = adaptive_t_test(record, 0.5, null_sd=0.5)
        assert result.p_value == pytest.approx(1.0 - norm_cdf(1.0))


class TestUniformity:
    def test_ks_distance_on_known_samples(self):
        assert ks_uniform_distance([0.5]) == pytest.approx(0.5)
        grid = (np.arange(100) + 0.5) / 100
        assert ks_uniform_distance(grid) == pytest.approx(0.005)

    def test_pvalues_uniform_under_fixed_design(self):
        # z-test on independently gathered gaussian data: p ~ U[0,1]
        rng = np.random.default_rng(99)
        ps = []
        for _ in range(1000):
            X = rng.standard_normal((40, 3))
            Y = X @ np.array([0.0, 0.4, -0.2]) + rng.standard_normal(40)
            ps.append(z_test_coefficient(X, Y, 0, 0.0, 1.0).p_value)
        assert ks_uniform_distance(ps) <= 0.05
