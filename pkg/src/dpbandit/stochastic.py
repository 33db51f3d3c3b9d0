"""UCB-style policies for simple stochastic bandits, private and not.

The private variant keeps one epsilon/K tree counter per arm and builds its
index from the counter's noisy sum, the usual confidence bonus, and a
high-probability radius for the counter noise (gamma / N).  Arm selection
never reads a reward except through counter releases, so the whole action
history is epsilon-DP in the reward stream by post-processing.

Two confidence-bonus shapes are supported:

* ``log-t``     sqrt(2 ln(t / delta) / n)   (anytime, the theory default)
* ``hoeffding`` sqrt(ln(2 / delta) / (2 n)) (fixed-confidence Hoeffding width)

The hoeffding shape explores far less at desk-scale horizons and is what the
experiment presets use to reproduce the strongly adapted (heavily biased)
data-gathering regime; see the harness presets.
"""

from __future__ import annotations

import math

from .core import Policy, as_seed_sequence
from .privacy import BudgetAccountant, TreeCounter, noise_bound

__all__ = ["ucb_index", "privucb_index", "UcbPolicy", "PrivUcbPolicy",
           "ucb_policy", "privucb_policy", "BONUS_FORMS"]

BONUS_FORMS = ("log-t", "hoeffding")


def ucb_index(mean: float, n: int, t: int, delta: float) -> float:
    """Non-private upper confidence index; +inf signals a forced pull."""
    if n == 0:
        return math.inf
    if n < 0 or t < 1:
        raise ValueError("counts and rounds must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return mean + math.sqrt(2.0 * math.log(t / delta) / n)


def _bonus(form: str, n: int, t: int, delta: float) -> float:
    if form == "log-t":
        return math.sqrt(2.0 * math.log(t / delta) / n)
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


class UcbPolicy(Policy):
    """Pull each arm once, then argmax of mean + bonus (ties to lowest arm)."""

    def __init__(self, K: int, delta: float, seed=None, bonus: str = "log-t"):
        if K < 1:
            raise ValueError("K must be >= 1")
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        if bonus not in BONUS_FORMS:
            raise ValueError(f"unknown bonus form {bonus!r}")
        self.K = int(K)
        self.delta = float(delta)
        self.bonus = bonus
        self._counts = [0] * K
        self._sums = [0.0] * K
        self._last_arm = -1

    def select(self, t: int, contexts=None) -> int:
        counts = self._counts
        for i in range(self.K):
            if counts[i] == 0:
                self._last_arm = i
                return i
        sums = self._sums
        delta = self.delta
        if self.bonus == "log-t":
            c2 = 2.0 * math.log(t / delta)
        else:
            c2 = 0.5 * math.log(2.0 / delta)
        best, best_arm = -math.inf, 0
        for i in range(self.K):
            n = counts[i]
            idx = sums[i] / n + math.sqrt(c2 / n)
            if idx > best:
                best, best_arm = idx, i
        self._last_arm = best_arm
        return best_arm

    def observe(self, arm: int, reward: float) -> None:
        self._counts[arm] += 1
        self._sums[arm] += reward


class PrivUcbPolicy(Policy):
    """UCB over privately released per-arm sums.

    Each arm owns a TreeCounter charged epsilon / K; gamma is the counter's
    own high-probability noise radius at failure delta / (K * T).
    """

    def __init__(
        self,
        K: int,
        T: int,
        epsilon: float,
        delta: float | None = None,
        seed=None,
        bonus: str = "log-t",
    ):
        if K < 1 or T < 1:
            raise ValueError("K and T must be >= 1")
        if epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {epsilon}")
        if delta is None:
            delta = 1.0 / T
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        if bonus not in BONUS_FORMS:
            raise ValueError(f"unknown bonus form {bonus!r}")
        self.K = int(K)
        self.T = int(T)
        self.epsilon = float(epsilon)
        self.delta = float(delta)
        self.bonus = bonus
        streams = as_seed_sequence(seed).spawn(K)
        self._counters = [TreeCounter(epsilon / K, s) for s in streams]
        self._counts = [0] * K
        # noisy mean + gamma/N, refreshed only when the arm's counter changes
        self._static_index = [math.inf] * K
        self._gamma_cache: dict[int, float] = {}
        self.accountant = BudgetAccountant()
        for i in range(K):
            self.accountant.charge(f"arm-{i}-counter", epsilon / K)

    def _gamma(self, n: int) -> float:
        cached = self._gamma_cache.get(n)
        if cached is None:
            cached = noise_bound(n, self.epsilon / self.K,
                                 self.delta / (self.K * self.T))
            self._gamma_cache[n] = cached
        return cached

    def _refresh(self, arm: int) -> None:
        n = self._counts[arm]
        noisy_mean = self._counters[arm].release() / n
        self._static_index[arm] = noisy_mean + self._gamma(n) / n
        if self.bonus == "hoeffding":
            self._static_index[arm] += math.sqrt(
                math.log(2.0 / self.delta) / (2.0 * n)
            )

    def select(self, t: int, contexts=None) -> int:
        counts = self._counts
        for i in range(self.K):
            if counts[i] == 0:
                return i
        static = self._static_index
        if self.bonus == "hoeffding":
            best, best_arm = -math.inf, 0
            for i in range(self.K):
                if static[i] > best:
                    best, best_arm = static[i], i
            return best_arm
        c2 = 2.0 * math.log(t / self.delta)
        best, best_arm = -math.inf, 0
        for i in range(self.K):
            idx = static[i] + math.sqrt(c2 / counts[i])
            if idx > best:
                best, best_arm = idx, i
        return best_arm

    def observe(self, arm: int, reward: float) -> None:
        self._counters[arm].add(reward)
        self._counts[arm] += 1
        self._refresh(arm)

    def noisy_mean(self, arm: int) -> float:
        """Private sample-mean estimate for one arm (pulled at least once)."""
        n = self._counts[arm]
        if n == 0:
            raise ValueError(f"arm {arm} has not been pulled")
        return self._counters[arm].release() / n

    def index(self, arm: int, t: int) -> float:
        """Current private upper confidence index for one arm."""
        n = self._counts[arm]
        if n == 0:
            return math.inf
        return (
            self.noisy_mean(arm)
            + _bonus(self.bonus, n, t, self.delta)
            + self._gamma(n) / n
        )


def privucb_index(state: PrivUcbPolicy, arm: int, t: int) -> float:
    """Index of one arm at round t; +inf for an unpulled arm."""
    return state.index(arm, t)


def ucb_policy(K: int, delta: float, seed=None, bonus: str = "log-t") -> UcbPolicy:
    return UcbPolicy(K, delta, seed, bonus)


def privucb_policy(
    K: int, T: int, eps: float, delta: float | None = None, seed=None,
    bonus: str = "log-t",
) -> PrivUcbPolicy:
    return PrivUcbPolicy(K, T, eps, delta, seed, bonus)
