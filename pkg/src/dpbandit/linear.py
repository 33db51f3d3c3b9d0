"""Linear contextual bandits: ridge UCB and its reward-private variant.

Each arm keeps a ridge state (gram matrix X'X + lam*I and cross-product X'y).
The private policy additionally streams the per-round x*y vectors into a
VectorTreeCounter and solves against the counter's noisy release, so rewards
only ever reach arm selection through an epsilon-DP release; everything else
(gram matrices, widths, argmaxes) is a function of contexts and the action
history alone.

The width multiplier ``width_scale`` scales the confidence term the policies
use for exploration (1.0 keeps the exact theoretical width).  Small values
give the greedy, strongly adaptive gathering regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import (Policy, RewardModel, as_seed_sequence,
                   generate_tableau, interact_tableau)
from .privacy import BudgetAccountant, VectorTreeCounter, vector_noise_bound

__all__ = [
    "LinUcbConfig",
    "ArmRegressionState",
    "ridge_estimate",
    "private_estimate",
    "confidence_width",
    "linpriv_index",
    "LinUcbPolicy",
    "oful_policy",
    "linpriv_policy",
    "PredictionBias",
    "prediction_bias",
]


@dataclass(frozen=True)
class LinUcbConfig:
    """Parameters shared by the ridge UCB policies."""

    K: int
    d: int
    T: int
    lam: float = 1.0
    delta: float | None = None
    epsilon: float | None = None   # None: non-private baseline
    width_scale: float = 1.0
    l1_bound: float | None = None  # sensitivity of x*y items; default sqrt(d)

    def __post_init__(self):
        if self.K < 1 or self.d < 1 or self.T < 1:
            raise ValueError("K, d, T must be >= 1")
        if self.lam < 1.0:
            raise ValueError("lam must be >= 1 (required by the width analysis)")
        delta = 1.0 / self.T if self.delta is None else self.delta
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        object.__setattr__(self, "delta", float(delta))
        if self.epsilon is not None and self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive when given")
        if self.width_scale < 0.0:
            raise ValueError("width_scale must be non-negative")
        if self.l1_bound is None:
            object.__setattr__(self, "l1_bound", math.sqrt(self.d))


class ArmRegressionState:
    """Ridge accumulators for one arm, with an optional private cross-product."""

    def __init__(self, d: int, lam: float, epsilon: float | None = None,
                 l1_bound: float | None = None, seed=None):
        if d < 1:
            raise ValueError("d must be >= 1")
        if lam <= 0.0:
            raise ValueError("lam must be positive")
        self.d = d
        self.lam = float(lam)
        self.gram = np.eye(d) * lam
        self.xty = np.zeros(d)
        self.count = 0
        self.counter = None
        self._spd_checked = True  # lam * I is positive definite
        if epsilon is not None:
            self.counter = VectorTreeCounter(
                epsilon, d, math.sqrt(d) if l1_bound is None else l1_bound, seed
            )

    def update(self, x: np.ndarray, y: float) -> None:
        x = np.asarray(x, dtype=float)
        self.gram += np.outer(x, x)
        self.xty += y * x
        self.count += 1
        self._spd_checked = False
        if self.counter is not None:
            self.counter.add(y * x)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """SPD solve of gram @ theta = rhs (no explicit inverse)."""
        if not self._spd_checked:
            try:
                np.linalg.cholesky(self.gram)
            except np.linalg.LinAlgError as exc:
                raise RuntimeError("gram matrix lost positive definiteness") from exc
            self._spd_checked = True
        return np.linalg.solve(self.gram, rhs)


def ridge_estimate(state: ArmRegressionState) -> np.ndarray:
    """Regularized least-squares coefficients from the exact cross-product."""
    return state.solve(state.xty)


def private_estimate(state: ArmRegressionState) -> np.ndarray:
    """Ridge solve against the counter's noisy cross-product release."""
    if state.counter is None:
        raise ValueError("state has no private counter")
    rhs = state.counter.release() if state.counter.t > 0 else np.zeros(state.d)
    return state.solve(rhs)


def confidence_width(state: ArmRegressionState, x: np.ndarray, t: int,
                     delta: float) -> float:
    """Exploration width ||x||_{V^-1} (sqrt(2 d ln((1 + t/lam)/delta)) + sqrt(lam))."""
    x = np.asarray(x, dtype=float)
    xvx = float(x @ state.solve(x))
    radius = math.sqrt(2.0 * state.d * math.log((1.0 + t / state.lam) / delta))
    return math.sqrt(max(xvx, 0.0)) * (radius + math.sqrt(state.lam))


def linpriv_index(state: ArmRegressionState, x: np.ndarray, t: int,
                  delta: float, epsilon: float, K: int,
                  width_scale: float = 1.0) -> float:
    """Private payoff estimate plus noise slack plus exploration width.

    The slack is the vector counter's own l2 error radius divided by
    sqrt(lam): ||V^-1 eta||_{...} <= ||eta||_2 / sqrt(lam) for lam >= 1.
    """
    if state.count == 0:
        return math.inf
    yhat = float(private_estimate(state) @ np.asarray(x, dtype=float))
    s = vector_noise_bound(state.count, epsilon, delta / K, state.d,
                           state.counter.l1_bound)
    w = confidence_width(state, x, t, delta)
    return yhat + width_scale * (s / math.sqrt(state.lam) + w)


class LinUcbPolicy(Policy):
    """Per-arm ridge UCB; private when the config carries an epsilon."""

    def __init__(self, cfg: LinUcbConfig, seed=None):
        self.cfg = cfg
        self.K = cfg.K
        streams = as_seed_sequence(seed).spawn(cfg.K)
        self.arms = [
            ArmRegressionState(cfg.d, cfg.lam, cfg.epsilon, cfg.l1_bound, s)
            for s in streams
        ]
        self._last_contexts = None
        self.accountant = BudgetAccountant()
        if cfg.epsilon is not None:
            # One row of the tableau feeds at most one arm's reward stream, so
            # the arm counters compose in parallel: the full budget per arm.
            self.accountant.charge("reward-stream", cfg.epsilon)

    @property
    def private(self) -> bool:
        return self.cfg.epsilon is not None

    def index(self, arm: int, x: np.ndarray, t: int) -> float:
        state = self.arms[arm]
        if state.count == 0:
            return math.inf
        cfg = self.cfg
        if self.private:
            return linpriv_index(state, x, t, cfg.delta, cfg.epsilon, cfg.K,
                                 cfg.width_scale)
        yhat = float(ridge_estimate(state) @ np.asarray(x, dtype=float))
        return yhat + cfg.width_scale * confidence_width(state, x, t, cfg.delta)

    def select(self, t: int, contexts=None) -> int:
        if contexts is None:
            raise ValueError("linear policies need per-round contexts")
        contexts = np.asarray(contexts, dtype=float)
        if contexts.shape != (self.K, self.cfg.d):
            raise ValueError(
                f"expected contexts of shape {(self.K, self.cfg.d)}, "
                f"got {contexts.shape}"
            )
        self._last_contexts = contexts
        best, best_arm = -math.inf, 0
        for i in range(self.K):
            idx = self.index(i, contexts[i], t)
            if idx > best:
                best, best_arm = idx, i
        return best_arm

    def observe(self, arm: int, reward: float) -> None:
        if self._last_contexts is None:
            raise RuntimeError("observe called before select")
        self.arms[arm].update(self._last_contexts[arm], reward)


def oful_policy(cfg: LinUcbConfig, seed=None) -> LinUcbPolicy:
    """Non-private ridge UCB (any epsilon on the config is dropped)."""
    if cfg.epsilon is not None:
        cfg = replace(cfg, epsilon=None)
    return LinUcbPolicy(cfg, seed)


def linpriv_policy(cfg: LinUcbConfig, seed=None) -> LinUcbPolicy:
    if cfg.epsilon is None:
        raise ValueError("linpriv needs a privacy budget epsilon")
    return LinUcbPolicy(cfg, seed)


@dataclass(frozen=True)
class PredictionBias:
    """Monte Carlo estimate of per-context prediction bias for one arm.

    mean[t] averages (theta_hat - theta_arm) . x_{t, arm} over the
    replications in which round t's context entered the arm's training set;
    counts[t] is that number of replications.  max_abs is the largest
    |mean[t]| over contexts with a nonzero count (NaN if the arm was never
    pulled anywhere).
    """

    arm: int
    estimator: str
    mean: np.ndarray
    se: np.ndarray
    counts: np.ndarray
    reps_with_arm: int

    @property
    def max_abs(self) -> float:
        seen = self.counts > 0
        if not seen.any():
            return math.nan
        return float(np.nanmax(np.abs(self.mean[seen])))

    @property
    def se_at_max(self) -> float:
        seen = np.flatnonzero(self.counts > 0)
        if seen.size == 0:
            return math.nan
        j = seen[np.argmax(np.abs(self.mean[seen]))]
        return float(self.se[j])


def _policy_for(kind: str, cfg: LinUcbConfig, seed):
    from .core import RoundRobinPolicy, UniformRandomPolicy

    if kind == "oful":
        return oful_policy(cfg, seed)
    if kind == "linpriv":
        return linpriv_policy(cfg, seed)
    if kind == "round-robin":
        return RoundRobinPolicy(cfg.K, seed)
    if kind == "uniform-random":
        return UniformRandomPolicy(cfg.K, seed)
    raise ValueError(f"unknown linear policy kind {kind!r}")


def prediction_bias(
    model: RewardModel,
    cfg: LinUcbConfig,
    policy_kind: str,
    arm: int,
    reps: int,
    base_seed: int = 0,
    estimator: str = "ols",
) -> PredictionBias:
    """Estimate the per-context prediction bias of arm's trained estimator.

    Requires a fixed context list on the model so that the context gathered
    at round t is the same vector in every replication; conditioning on "the
    arm's set pulled at round t" is then well defined.  For each replication
    the estimator is fit on the arm's gathered (x, y) pairs: "ridge" uses the
    gathering lam, "ols" the unregularized solution when the design has full
    column rank (rank-deficient replications are skipped).
    """
    if model.fixed_contexts is None:
        raise ValueError("prediction_bias requires a fixed context list")
    if estimator not in ("ols", "ridge"):
        raise ValueError(f"unknown estimator {estimator!r}")
    if reps < 2:
        raise ValueError("need at least 2 replications")
    T, K, d = model.fixed_contexts.shape
    if arm not in range(K):
        raise ValueError(f"arm {arm} out of range")
    theta = model.thetas[arm]
    sums = np.zeros(T)
    sq_sums = np.zeros(T)
    counts = np.zeros(T, dtype=np.int64)
    reps_with_arm = 0
    for rep in range(reps):
        seed = base_seed + rep
        tab = generate_tableau(model, T, K, (seed, 1))
        policy = _policy_for(policy_kind, cfg, (seed, 2))
        record = interact_tableau(tab, policy)
        rounds = np.flatnonzero(record.choices == arm)
        if rounds.size == 0:
            continue
        X = model.fixed_contexts[rounds, arm, :]
        Y = record.observed_rewards[rounds]
        if estimator == "ridge":
            theta_hat = np.linalg.solve(X.T @ X + cfg.lam * np.eye(d), X.T @ Y)
        else:
            if np.linalg.matrix_rank(X) < d:
                continue
            theta_hat, *_ = np.linalg.lstsq(X, Y, rcond=None)
        reps_with_arm += 1
        errs = X @ (theta_hat - theta)
        sums[rounds] += errs
        sq_sums[rounds] += errs**2
        counts[rounds] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
        var = np.where(
            counts > 1,
            (sq_sums - counts * mean**2) / np.maximum(counts - 1, 1),
            np.nan,
        )
        se = np.sqrt(np.maximum(var, 0.0) / np.maximum(counts, 1))
    return PredictionBias(arm, estimator, mean, se, counts, reps_with_arm)
