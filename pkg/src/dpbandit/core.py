"""Bandit tableaux, reward models, interaction drivers, and run records.

Arms are indexed 0..K-1 and rounds 1..T throughout.  All randomness flows
through numpy Generators; the tableau generator consumes draws row by row
(contexts for round t first, then the K rewards of round t), and the online
driver consumes the identical stream, so a shared seed makes the online and
pre-drawn interactions equal path by path, not merely in distribution.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "as_seed_sequence",
    "ProtocolViolation",
    "RewardModel",
    "BanditTableau",
    "Policy",
    "RoundRobinPolicy",
    "UniformRandomPolicy",
    "RunRecord",
    "generate_tableau",
    "interact_tableau",
    "interact_online",
    "pseudo_regret_stochastic",
    "pseudo_regret_contextual",
    "regret_curve_stochastic",
]

BERNOULLI = "bernoulli-arms"
UNIFORM = "uniform-arms"
LINEAR = "linear-gaussian"
_STOCHASTIC_KINDS = (BERNOULLI, UNIFORM)


class ProtocolViolation(RuntimeError):
    """A policy broke the interaction contract (e.g. out-of-range arm)."""


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Accept raw entropy or an existing SeedSequence interchangeably."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


@dataclass(frozen=True)
class RewardModel:
    """Reward-generating process for one bandit instance.

    kind selects the family: Bernoulli(mu_i) or mean-preserving uniform on
    [0, 1] for the stochastic arms, or a linear-gaussian model
    y = theta_i . x + N(0, noise_sd^2) with per-round contexts.  Contexts are
    drawn uniformly on the unit sphere unless a fixed (T, K, d) tensor is
    supplied.  clamp truncates linear rewards to [0, 1]; leave it off to
    reproduce unbounded-noise setups.
    """

    kind: str
    arm_means: tuple[float, ...] | None = None
    thetas: np.ndarray | None = None
    noise_sd: float = 0.0
    context_dim: int | None = None
    fixed_contexts: np.ndarray | None = None
    clamp: bool = True

    def __post_init__(self):
        if self.kind in _STOCHASTIC_KINDS:
            if not self.arm_means:
                raise ValueError(f"{self.kind} model requires arm_means")
            means = tuple(float(m) for m in self.arm_means)
            if any(not 0.0 <= m <= 1.0 for m in means):
                raise ValueError(f"arm means must lie in [0, 1], got {means}")
            object.__setattr__(self, "arm_means", means)
        elif self.kind == LINEAR:
            if self.thetas is None:
                raise ValueError("linear-gaussian model requires thetas")
            thetas = np.asarray(self.thetas, dtype=float)
            if thetas.ndim != 2:
                raise ValueError("thetas must be a (K, d) array")
            norms = np.linalg.norm(thetas, axis=1)
            if np.any(norms > 1.0 + 1e-9):
                raise ValueError(f"coefficient norms must be <= 1, got {norms}")
            if self.noise_sd < 0.0:
                raise ValueError("noise_sd must be non-negative")
            object.__setattr__(self, "thetas", thetas)
            object.__setattr__(self, "context_dim", thetas.shape[1])
            if self.fixed_contexts is not None:
                ctx = np.asarray(self.fixed_contexts, dtype=float)
                if ctx.ndim != 3 or ctx.shape[1:] != thetas.shape:
                    raise ValueError("fixed_contexts must have shape (T, K, d)")
                if np.any(np.linalg.norm(ctx, axis=2) > 1.0 + 1e-9):
                    raise ValueError("context norms must be <= 1")
                object.__setattr__(self, "fixed_contexts", ctx)
        else:
            raise ValueError(f"unknown reward model kind {self.kind!r}")

    @property
    def K(self) -> int:
        if self.kind in _STOCHASTIC_KINDS:
            return len(self.arm_means)
        return self.thetas.shape[0]

    @property
    def contextual(self) -> bool:
        return self.kind == LINEAR

    def _draw_row(self, t: int, rng: np.random.Generator):
        """Contexts (or None) and rewards for round t; fixed stream layout."""
        if self.kind == BERNOULLI:
            u = rng.random(self.K)
            return None, (u < np.asarray(self.arm_means)).astype(float)
        if self.kind == UNIFORM:
            mu = np.asarray(self.arm_means)
            half = np.minimum(mu, 1.0 - mu)
            u = rng.random(self.K)
            return None, mu + half * (2.0 * u - 1.0)
        if self.fixed_contexts is not None:
            ctx = self.fixed_contexts[t - 1]
        else:
            raw = rng.standard_normal((self.K, self.context_dim))
            ctx = raw / np.maximum(np.linalg.norm(raw, axis=1, keepdims=True), 1e-300)
        noise = rng.standard_normal(self.K) * self.noise_sd
        rewards = np.einsum("kd,kd->k", self.thetas, ctx) + noise
        if self.clamp:
            rewards = np.clip(rewards, 0.0, 1.0)
        return ctx, rewards


@dataclass(frozen=True)
class BanditTableau:
    """Pre-drawn rewards for every (round, arm), plus contexts if contextual."""

    rewards: np.ndarray
    contexts: np.ndarray | None = None

    def __post_init__(self):
        rewards = np.asarray(self.rewards, dtype=float)
        if rewards.ndim != 2 or rewards.size == 0:
            raise ValueError("rewards must be a non-empty (T, K) matrix")
        if not np.all(np.isfinite(rewards)):
            raise ValueError("rewards must be finite")
        object.__setattr__(self, "rewards", rewards)
        if self.contexts is not None:
            ctx = np.asarray(self.contexts, dtype=float)
            if ctx.ndim != 3 or ctx.shape[:2] != rewards.shape:
                raise ValueError("contexts must have shape (T, K, d)")
            if np.any(np.linalg.norm(ctx, axis=2) > 1.0 + 1e-9):
                raise ValueError("context norms must be <= 1")
            object.__setattr__(self, "contexts", ctx)

    @property
    def T(self) -> int:
        return self.rewards.shape[0]

    @property
    def K(self) -> int:
        return self.rewards.shape[1]

    @property
    def d(self) -> int | None:
        return None if self.contexts is None else self.contexts.shape[2]


class Policy:
    """Sequential arm-selection procedure.

    Single-owner: one policy instance drives one run.  Implementations must
    be deterministic given their seed and the observation sequence.
    """

    K: int

    def select(self, t: int, contexts: np.ndarray | None = None) -> int:
        raise NotImplementedError

    def observe(self, arm: int, reward: float) -> None:
        raise NotImplementedError


class RoundRobinPolicy(Policy):
    """Non-adaptive control: arm (t-1) mod K at round t."""

    def __init__(self, K: int, seed=None):
        self.K = int(K)

    def select(self, t: int, contexts=None) -> int:
        return (t - 1) % self.K

    def observe(self, arm: int, reward: float) -> None:
        pass


class UniformRandomPolicy(Policy):
    """Non-adaptive control: uniformly random arm each round."""

    def __init__(self, K: int, seed=None):
        self.K = int(K)
        self._rng = np.random.default_rng(seed)

    def select(self, t: int, contexts=None) -> int:
        return int(self._rng.integers(self.K))

    def observe(self, arm: int, reward: float) -> None:
        pass


@dataclass(frozen=True)
class RunRecord:
    """Everything one interaction produced.

    sample_means holds NaN for arms never pulled; it is never silently zero.
    """

    choices: np.ndarray
    observed_rewards: np.ndarray
    arm_counts: np.ndarray
    arm_sums: np.ndarray
    sample_means: np.ndarray

    @classmethod
    def from_run(cls, choices, rewards, K: int) -> "RunRecord":
        choices = np.asarray(choices, dtype=np.int64)
        rewards = np.asarray(rewards, dtype=float)
        counts = np.bincount(choices, minlength=K).astype(np.int64)
        sums = np.bincount(choices, weights=rewards, minlength=K)
        with np.errstate(invalid="ignore"):
            means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
        return cls(choices, rewards, counts, sums, means)

    @property
    def T(self) -> int:
        return len(self.choices)

    @property
    def K(self) -> int:
        return len(self.arm_counts)

    def to_csv(self, path) -> None:
        """One row per round: t, arm, reward."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "arm", "reward"])
            for t, (arm, y) in enumerate(zip(self.choices, self.observed_rewards), 1):
                writer.writerow([t, int(arm), f"{y:.10g}"])

    def summary_json(self) -> str:
        means = [None if math.isnan(m) else m for m in self.sample_means]
        return json.dumps(
            {
                "T": self.T,
                "K": self.K,
                "arm_counts": self.arm_counts.tolist(),
                "arm_sums": self.arm_sums.tolist(),
                "arm_means": means,
            }
        )


def generate_tableau(model: RewardModel, T: int, K: int, seed) -> BanditTableau:
    """Draw the full T x K reward matrix (and contexts) ahead of time."""
    if T < 1 or K < 1:
        raise ValueError("T and K must be >= 1")
    if model.K != K:
        raise ValueError(f"model has {model.K} arms, expected {K}")
    rng = np.random.default_rng(seed)
    if not model.contextual:
        # One (T, K) block consumes the stream exactly like T row draws.
        u = rng.random((T, K))
        if model.kind == BERNOULLI:
            rewards = (u < np.asarray(model.arm_means)[None, :]).astype(float)
        else:
            mu = np.asarray(model.arm_means)
            half = np.minimum(mu, 1.0 - mu)
            rewards = mu[None, :] + half[None, :] * (2.0 * u - 1.0)
        return BanditTableau(rewards, None)
    rewards = np.empty((T, K))
    contexts = np.empty((T, K, model.context_dim))
    for t in range(1, T + 1):
        ctx, row = model._draw_row(t, rng)
        rewards[t - 1] = row
        contexts[t - 1] = ctx
    return BanditTableau(rewards, contexts)


def _checked_arm(arm, K: int) -> int:
    arm = int(arm)
    if not 0 <= arm < K:
        raise ProtocolViolation(f"policy selected arm {arm} outside [0, {K})")
    return arm


def interact_tableau(tab: BanditTableau, policy: Policy) -> RunRecord:
    """Drive a policy over pre-drawn rewards, revealing one entry per round."""
    if policy.K != tab.K:
        raise ValueError(f"policy has {policy.K} arms, tableau has {tab.K}")
    choices = np.empty(tab.T, dtype=np.int64)
    rewards = np.empty(tab.T)
    for t in range(1, tab.T + 1):
        ctx = None if tab.contexts is None else tab.contexts[t - 1]
        arm = _checked_arm(policy.select(t, ctx), tab.K)
        y = float(tab.rewards[t - 1, arm])
        policy.observe(arm, y)
        choices[t - 1] = arm
        rewards[t - 1] = y
    return RunRecord.from_run(choices, rewards, tab.K)


def interact_online(model: RewardModel, T: int, policy: Policy, seed) -> RunRecord:
    """Drive a policy with rewards drawn on demand.

    Round t consumes exactly the stream elements that generate_tableau spends
    on row t, so with a shared seed (and a policy seeded identically) the
    outcome equals interact_tableau(generate_tableau(...), ...) exactly.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if policy.K != model.K:
        raise ValueError(f"policy has {policy.K} arms, model has {model.K}")
    rng = np.random.default_rng(seed)
    choices = np.empty(T, dtype=np.int64)
    rewards = np.empty(T)
    for t in range(1, T + 1):
        ctx, row = model._draw_row(t, rng)
        arm = _checked_arm(policy.select(t, ctx), model.K)
        y = float(row[arm])
        policy.observe(arm, y)
        choices[t - 1] = arm
        rewards[t - 1] = y
    return RunRecord.from_run(choices, rewards, model.K)


def pseudo_regret_stochastic(record: RunRecord, model: RewardModel) -> float:
    """T * max_i mu_i minus the sum of pulled arms' means."""
    if model.contextual:
        raise ValueError("stochastic pseudo-regret needs a stochastic model")
    mu = np.asarray(model.arm_means)
    return float(record.T * mu.max() - mu[record.choices].sum())


def regret_curve_stochastic(record: RunRecord, model: RewardModel) -> np.ndarray:
    """Cumulative pseudo-regret after each round (length T)."""
    if model.contextual:
        raise ValueError("stochastic pseudo-regret needs a stochastic model")
    mu = np.asarray(model.arm_means)
    return np.cumsum(mu.max() - mu[record.choices])


def pseudo_regret_contextual(
    record: RunRecord, tab: BanditTableau, model: RewardModel
) -> float:
    """Sum over rounds of (best expected payoff - chosen expected payoff)."""
    if not model.contextual:
        raise ValueError("contextual pseudo-regret needs a linear model")
    if tab.contexts is None:
        raise ValueError("tableau has no contexts")
    payoffs = np.einsum("kd,tkd->tk", model.thetas, tab.contexts)
    chosen = payoffs[np.arange(tab.T), record.choices]
    return float((payoffs.max(axis=1) - chosen).sum())
