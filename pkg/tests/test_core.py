import json
import math

import numpy as np
import pytest

from dpbandit.core import (
    BERNOULLI,
    LINEAR,
    UNIFORM,
    BanditTableau,
    Policy,
    ProtocolViolation,
    RewardModel,
    RoundRobinPolicy,
    RunRecord,
    UniformRandomPolicy,
    generate_tableau,
    interact_online,
    interact_tableau,
    pseudo_regret_contextual,
    pseudo_regret_stochastic,
    regret_curve_stochastic,
)
from dpbandit.linear import LinUcbConfig, linpriv_policy, oful_policy
from dpbandit.stochastic import privucb_policy, ucb_policy


class GreedyPolicy(Policy):
    """Pull each arm once, then argmax of empirical mean (ties lowest)."""

    def __init__(self, K):
        self.K = K
        self.counts = [0] * K
        self.sums = [0.0] * K

    def select(self, t, contexts=None):
        for i in range(self.K):
            if self.counts[i] == 0:
                return i
        means = [self.sums[i] / self.counts[i] for i in range(self.K)]
        return max(range(self.K), key=lambda i: (means[i], -i))

    def observe(self, arm, reward):
        self.counts[arm] += 1
        self.sums[arm] += reward


class BadPolicy(Policy):
    def __init__(self, K):
        self.K = K

    def select(self, t, contexts=None):
        return self.K + 3

    def observe(self, arm, reward):
        pass


class TestRewardModel:
    def test_rejects_out_of_range_means(self):
        with pytest.raises(ValueError):
            RewardModel(BERNOULLI, arm_means=(0.5, 1.2))

    def test_rejects_long_thetas(self):
        with pytest.raises(ValueError):
            RewardModel(LINEAR, thetas=np.array([[1.0, 0.9]]))

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            RewardModel("exp-arms", arm_means=(0.5,))

    def test_uniform_kind_mean_preserving(self):
        model = RewardModel(UNIFORM, arm_means=(0.3, 0.9))
        tab = generate_tableau(model, 20_000, 2, seed=0)
        assert tab.rewards.min() >= 0.0 and tab.rewards.max() <= 1.0
        np.testing.assert_allclose(tab.rewards.mean(axis=0), [0.3, 0.9],
                                   atol=0.01)


class TestGenerateTableau:
    def test_degenerate_bernoulli_columns(self):
        model = RewardModel(BERNOULLI, arm_means=(1.0, 0.0))
        tab = generate_tableau(model, 3, 2, seed=1)
        assert np.all(tab.rewards[:, 0] == 1.0)
        assert np.all(tab.rewards[:, 1] == 0.0)

    def test_same_seed_same_tableau(self):
        model = RewardModel(BERNOULLI, arm_means=(0.4, 0.6, 0.1))
        a = generate_tableau(model, 50, 3, seed=9)
        b = generate_tableau(model, 50, 3, seed=9)
        np.testing.assert_array_equal(a.rewards, b.rewards)

    def test_bernoulli_column_mean_three_sigma(self):
        # sd of the column mean is sqrt(p(1-p)/T) = 0.005 at p=.5, T=1e4
        model = RewardModel(BERNOULLI, arm_means=(0.5,))
        tab = generate_tableau(model, 10_000, 1, seed=123)
        assert abs(tab.rewards.mean() - 0.5) < 0.015

    def test_arm_count_mismatch_rejected(self):
        model = RewardModel(BERNOULLI, arm_means=(0.5, 0.5))
        with pytest.raises(ValueError):
            generate_tableau(model, 10, 3, seed=0)

    def test_linear_contexts_unit_norm(self):
        thetas = np.array([[0.6, 0.0], [0.0, 0.6]])
        model = RewardModel(LINEAR, thetas=thetas, noise_sd=0.1)
        tab = generate_tableau(model, 40, 2, seed=5)
        norms = np.linalg.norm(tab.contexts, axis=2)
        np.testing.assert_allclose(norms, 1.0, atol=1e-9)
        assert tab.rewards.min() >= 0.0 and tab.rewards.max() <= 1.0  # clamped

    def test_linear_unclamped_can_leave_unit_interval(self):
        thetas = np.zeros((1, 2))
        model = RewardModel(LINEAR, thetas=thetas, noise_sd=1.0, clamp=False)
        tab = generate_tableau(model, 200, 1, seed=5)
        assert tab.rewards.min() < 0.0


class TestTableauValidation:
    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            BanditTableau(np.array([[0.5, math.inf]]))

    def test_rejects_overlong_contexts(self):
        rewards = np.zeros((2, 1))
        ctx = np.full((2, 1, 2), 2.0)
        with pytest.raises(ValueError):
            BanditTableau(rewards, ctx)


class TestInteractTableau:
    def test_single_arm_sees_whole_column(self):
        tab = BanditTableau(np.linspace(0, 1, 7).reshape(-1, 1))
        record = interact_tableau(tab, GreedyPolicy(1))
        assert np.all(record.choices == 0)
        np.testing.assert_array_equal(record.observed_rewards,
                                      tab.rewards[:, 0])

    def test_greedy_hand_trace(self):
        # rows all (1, 0): pulls 0, 1 (forced), then arm 0 forever
        tab = BanditTableau(np.tile([1.0, 0.0], (5, 1)))
        record = interact_tableau(tab, GreedyPolicy(2))
        assert record.choices.tolist() == [0, 1, 0, 0, 0]
        assert record.observed_rewards.tolist() == [1.0, 0.0, 1.0, 1.0, 1.0]

    def test_counts_always_sum_to_horizon(self):
        tab = generate_tableau(
            RewardModel(BERNOULLI, arm_means=(0.2, 0.8, 0.5)), 31, 3, seed=3)
        for policy in (GreedyPolicy(3), RoundRobinPolicy(3),
                       UniformRandomPolicy(3, seed=1)):
            record = interact_tableau(tab, policy)
            assert record.arm_counts.sum() == 31

    def test_out_of_range_arm_aborts(self):
        tab = BanditTableau(np.zeros((4, 2)))
        with pytest.raises(ProtocolViolation):
            interact_tableau(tab, BadPolicy(2))

    def test_reward_provenance(self):
        tab = generate_tableau(
            RewardModel(BERNOULLI, arm_means=(0.4, 0.6)), 25, 2, seed=8)
        record = interact_tableau(tab, UniformRandomPolicy(2, seed=2))
        for t in range(25):
            assert record.observed_rewards[t] == tab.rewards[t,
                                                             record.choices[t]]


class TestInteractOnline:
    def test_round_robin_choice_pattern(self):
        model = RewardModel(BERNOULLI, arm_means=(0.5, 0.5))
        record = interact_online(model, 4, RoundRobinPolicy(2), seed=0)
        assert record.choices.tolist() == [0, 1, 0, 1]

    def test_deterministic_rewards_match_tableau_driver(self):
        model = RewardModel(BERNOULLI, arm_means=(1.0, 0.0))
        a = interact_online(model, 9, GreedyPolicy(2), seed=4)
        b = interact_tableau(generate_tableau(model, 9, 2, seed=4),
                             GreedyPolicy(2))
        assert a.choices.tolist() == b.choices.tolist()

    @pytest.mark.parametrize("kind,policy_fn", [
        ("ucb", lambda seed: ucb_policy(3, 0.05, seed)),
        ("privucb", lambda seed: privucb_policy(3, 30, 2.0, 0.05, seed)),
        ("random", lambda seed: UniformRandomPolicy(3, seed)),
    ])
    def test_replay_equivalence_stochastic(self, kind, policy_fn):
        model = RewardModel(BERNOULLI, arm_means=(0.8, 0.5, 0.2))
        for seed in range(40):
            online = interact_online(model, 30, policy_fn(seed), (seed, 1))
            tab = generate_tableau(model, 30, 3, (seed, 1))
            offline = interact_tableau(tab, policy_fn(seed))
            assert online.choices.tolist() == offline.choices.tolist()
            assert online.observed_rewards.tolist() == \
                offline.observed_rewards.tolist()

    @pytest.mark.parametrize("private", [False, True])
    def test_replay_equivalence_linear(self, private):
        thetas = np.array([[0.5, 0.3], [0.1, -0.4]])
        model = RewardModel(LINEAR, thetas=thetas, noise_sd=0.2)
        cfg = LinUcbConfig(K=2, d=2, T=20, lam=1.0, delta=0.05,
                           epsilon=0.5 if private else None)
        make = linpriv_policy if private else oful_policy
        for seed in range(15):
            online = interact_online(model, 20, make(cfg, seed), (seed, 2))
            tab = generate_tableau(model, 20, 2, (seed, 2))
            offline = interact_tableau(tab, make(cfg, seed))
            assert online.choices.tolist() == offline.choices.tolist()
            assert online.observed_rewards.tolist() == \
                offline.observed_rewards.tolist()


class TestRunRecord:
    def test_unpulled_arm_mean_is_nan_not_zero(self):
        record = RunRecord.from_run([0, 0, 0], [1.0, 0.0, 1.0], K=2)
        assert math.isnan(record.sample_means[1])
        assert record.arm_counts.tolist() == [3, 0]

    def test_means_times_counts_equals_sums(self):
        tab = generate_tableau(
            RewardModel(BERNOULLI, arm_means=(0.3, 0.7)), 50, 2, seed=11)
        record = interact_tableau(tab, UniformRandomPolicy(2, seed=0))
        prod = np.where(record.arm_counts > 0,
                        record.sample_means * record.arm_counts, 0.0)
        np.testing.assert_allclose(prod, record.arm_sums, atol=1e-9)

    def test_csv_and_summary_round_trip(self, tmp_path):
        record = RunRecord.from_run([0, 1, 0], [0.25, 1.0, 0.5], K=3)
        path = tmp_path / "run.csv"
        record.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,arm,reward"
        assert lines[1] == "1,0,0.25"
        assert len(lines) == 4
        summary = json.loads(record.summary_json())
        assert summary["arm_counts"] == [2, 1, 0]
        assert summary["arm_means"][2] is None


class TestRegret:
    def test_zero_when_best_arm_always_pulled(self):
        model = RewardModel(BERNOULLI, arm_means=(0.9, 0.1))
        record = RunRecord.from_run([0, 0, 0], [1, 1, 0], K=2)
        assert pseudo_regret_stochastic(record, model) == 0.0

    def test_direct_formula_value(self):
        model = RewardModel(BERNOULLI, arm_means=(1.0, 0.95))
        record = RunRecord.from_run([1, 1], [1, 1], K=2)
        assert pseudo_regret_stochastic(record, model) == pytest.approx(0.10)

    def test_identical_means_give_zero(self):
        model = RewardModel(BERNOULLI, arm_means=(0.5, 0.5))
        record = RunRecord.from_run([0, 1, 1, 0], [0, 1, 0, 1], K=2)
        assert pseudo_regret_stochastic(record, model) == 0.0

    def test_contextual_model_rejected(self):
        model = RewardModel(LINEAR, thetas=np.array([[0.5, 0.0]]))
        record = RunRecord.from_run([0], [0.5], K=1)
        with pytest.raises(ValueError):
            pseudo_regret_stochastic(record, model)

    def test_curve_is_cumulative(self):
        model = RewardModel(BERNOULLI, arm_means=(1.0, 0.5))
        record = RunRecord.from_run([1, 0, 1], [0, 1, 1], K=2)
        np.testing.assert_allclose(regret_curve_stochastic(record, model),
                                   [0.5, 0.5, 1.0])

    def test_contextual_single_arm_is_zero(self):
        thetas = np.array([[0.7, 0.0]])
        model = RewardModel(LINEAR, thetas=thetas, noise_sd=0.0)
        tab = generate_tableau(model, 6, 1, seed=0)
        record = interact_tableau(tab, RoundRobinPolicy(1))
        assert pseudo_regret_contextual(record, tab, model) == 0.0

    def test_contextual_hand_value(self):
        # d=1 thetas (1, -1), contexts all (1): arm 1 costs 2 per round
        thetas = np.array([[1.0], [-1.0]])
        ctx = np.ones((3, 2, 1))
        model = RewardModel(LINEAR, thetas=thetas, noise_sd=0.0,
                            fixed_contexts=ctx)
        tab = generate_tableau(model, 3, 2, seed=0)
        record = interact_tableau(tab, type("P", (Policy,), {
            "K": 2,
            "select": lambda self, t, contexts=None: 1,
            "observe": lambda self, arm, reward: None,
        })())
        assert pseudo_regret_contextual(record, tab, model) == pytest.approx(6.0)

    def test_optimal_choices_give_zero_contextual(self):
        thetas = np.array([[0.8, 0.0], [0.0, 0.8]])
        model = RewardModel(LINEAR, thetas=thetas, noise_sd=0.0)
        tab = generate_tableau(model, 10, 2, seed=3)
        payoffs = np.einsum("kd,tkd->tk", thetas, tab.contexts)
        best = payoffs.argmax(axis=1)

        class Oracle(Policy):
            K = 2

            def select(self, t, contexts=None):
                return int(best[t - 1])

            def observe(self, arm, reward):
                pass

        record = interact_tableau(tab, Oracle())
        assert pseudo_regret_contextual(record, tab, model) == 0.0

    def test_regret_bounded_by_worst_gap(self):
        model = RewardModel(BERNOULLI, arm_means=(0.9, 0.4, 0.2))
        tab = generate_tableau(model, 40, 3, seed=2)
        record = interact_tableau(tab, UniformRandomPolicy(3, seed=5))
        regret = pseudo_regret_stochastic(record, model)
        assert 0.0 <= regret <= 40 * (0.9 - 0.2)


def test_stream_layout_row_major():
    # the tableau consumes exactly T*K uniforms in row-major order
    model = RewardModel(BERNOULLI, arm_means=(0.5, 0.5, 0.5))
    tab = generate_tableau(model, 4, 3, seed=77)
    u = np.random.default_rng(77).random((4, 3))
    np.testing.assert_array_equal(tab.rewards, (u < 0.5).astype(float))
