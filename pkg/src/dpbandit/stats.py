"""Bias reports, hypothesis tests, and max-information p-value corrections.

Pure functions over immutable inputs.  Bias is always reported against the
model's true means with normal-approximation confidence intervals; the
Hoeffding width is available separately as a distribution-free radius.

Max-information is measured in bits (base-2), so the privacy-to-information
conversion carries a log2(e) factor while interior logarithms stay natural.
The correction gamma(alpha) = max((alpha - beta) / 2**k, 0) keeps the null
rejection probability of any adaptively selected statistic at most alpha.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .core import RewardModel, RunRecord

__all__ = [
    "BiasReport",
    "TestResult",
    "MaxInfoParams",
    "hoeffding_width",
    "estimate_bias",
    "z_test_coefficient",
    "max_info_bound",
    "pvalue_correction",
    "corrected_test",
    "adaptive_t_statistic",
    "most_pulled_arm",
    "adaptive_t_test",
    "norm_cdf",
    "ks_uniform_distance",
]


def norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def hoeffding_width(n: int, delta_fail: float) -> float:
    """Radius w with P(|sample mean - E| >= w) <= delta for [0,1] i.i.d. data."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < delta_fail < 1.0:
        raise ValueError(f"delta_fail must lie in (0, 1), got {delta_fail}")
    return math.sqrt(math.log(2.0 / delta_fail) / (2.0 * n))


@dataclass(frozen=True)
class BiasReport:
    """Per-arm Monte Carlo bias of the empirical means, with 95% CIs.

    Arms never pulled in any replication carry NaN estimates and n_reps 0;
    they are excluded from the aggregate.
    """

    bias: np.ndarray
    se: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    n_reps: np.ndarray

    @property
    def K(self) -> int:
        return len(self.bias)

    @property
    def aggregate_abs_bias(self) -> float:
        seen = self.n_reps > 0
        if not seen.any():
            return math.nan
        return float(np.abs(self.bias[seen]).mean())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["arm", "bias", "se", "ci_lo", "ci_hi", "n_reps"])
            for i in range(self.K):
                writer.writerow(
                    [i] + [f"{v:.10g}" for v in
                           (self.bias[i], self.se[i], self.ci_lo[i], self.ci_hi[i])]
                    + [int(self.n_reps[i])]
                )

    def to_json(self) -> str:
        clean = lambda a: [None if math.isnan(v) else v for v in a]
        return json.dumps(
            {
                "bias": clean(self.bias),
                "se": clean(self.se),
                "ci_lo": clean(self.ci_lo),
                "ci_hi": clean(self.ci_hi),
                "n_reps": self.n_reps.tolist(),
                "aggregate_abs_bias": self.aggregate_abs_bias,
            }
        )


def estimate_bias(runs: list[RunRecord], model: RewardModel) -> BiasReport:
    """Average (sample mean - true mean) per arm over replications.

    Each replication contributes to an arm only if it pulled that arm.
    """
    if len(runs) < 2:
        raise ValueError("need at least 2 runs")
    if model.contextual:
        raise ValueError("bias of empirical means needs a stochastic model")
    mu = np.asarray(model.arm_means)
    K = len(mu)
    devs = np.full((len(runs), K), np.nan)
    for r, rec in enumerate(runs):
        if rec.K != K:
            raise ValueError("run and model disagree on the number of arms")
        pulled = rec.arm_counts > 0
        devs[r, pulled] = rec.sample_means[pulled] - mu[pulled]
    n_reps = np.sum(~np.isnan(devs), axis=0)
    with np.errstate(invalid="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN arms
        bias = np.nanmean(devs, axis=0)
        sd = np.nanstd(devs, axis=0, ddof=1)
    se = np.where(n_reps > 1, sd / np.sqrt(np.maximum(n_reps, 1)), np.nan)
    bias = np.where(n_reps > 0, bias, np.nan)
    return BiasReport(bias, se, bias - 1.96 * se, bias + 1.96 * se,
                      n_reps.astype(np.int64))


@dataclass(frozen=True)
class TestResult:
    """A test statistic with its raw p-value and, once corrected, the
    adjusted rejection threshold."""

    statistic: float
    p_value: float
    descriptor: str
    corrected_threshold: float | None = None
    reject_raw: bool | None = None
    reject_corrected: bool | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "statistic": self.statistic,
                "p_value": self.p_value,
                "descriptor": self.descriptor,
                "corrected_threshold": self.corrected_threshold,
                "reject_raw": self.reject_raw,
                "reject_corrected": self.reject_corrected,
            }
        )

    def to_csv_row(self) -> str:
        """One CSV line under the header statistic,p_value,corrected_threshold,
        reject_raw,reject_corrected,descriptor."""
        opt = lambda v: "" if v is None else (f"{v:.10g}" if not isinstance(v, bool)
                                              else str(int(v)))
        return ",".join([
            f"{self.statistic:.10g}", f"{self.p_value:.10g}",
            opt(self.corrected_threshold), opt(self.reject_raw),
            opt(self.reject_corrected), self.descriptor,
        ])


def z_test_coefficient(
    design: np.ndarray,
    responses: np.ndarray,
    coord: int,
    null_value: float = 0.0,
    noise_sd: float = 1.0,
) -> TestResult:
    """Two-sided z-test for one OLS coefficient with known noise scale.

    z = (theta_hat_j - null) / (noise_sd * sqrt((X'X)^-1_jj)).
    """
    X = np.asarray(design, dtype=float)
    Y = np.asarray(responses, dtype=float)
    if X.ndim != 2 or Y.shape != (X.shape[0],):
        raise ValueError("design must be (n, d) with matching responses")
    n, d = X.shape
    if not 0 <= coord < d:
        raise ValueError(f"coordinate {coord} out of range for d={d}")
    if noise_sd <= 0.0:
        raise ValueError("noise_sd must be positive")
    if n < d or np.linalg.matrix_rank(X) < d:
        raise ValueError(
            f"design is rank deficient (n={n}, d={d}): coordinate untestable"
        )
    gram = X.T @ X
    theta = np.linalg.solve(gram, X.T @ Y)
    var_jj = float(np.linalg.inv(gram)[coord, coord])
    z = (float(theta[coord]) - null_value) / (noise_sd * math.sqrt(var_jj))
    p = 2.0 * (1.0 - norm_cdf(abs(z)))
    return TestResult(z, p, f"z-test coord {coord} == {null_value:g}")


def max_info_bound(eps: float, T: int, beta: float) -> float:
    """Beta-approximate max-information (in bits) of an eps-DP algorithm run
    on T independent rows: log2(e) * (eps^2 T / 2 + eps sqrt(T ln(2/beta)/2))."""
    if eps < 0.0:
        raise ValueError("eps must be non-negative")
    if T < 1:
        raise ValueError("T must be >= 1")
    if eps == 0.0:
        return 0.0
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1) when eps > 0, got {beta}")
    nat = eps * eps * T / 2.0 + eps * math.sqrt(T * math.log(2.0 / beta) / 2.0)
    return math.log2(math.e) * nat


def pvalue_correction(alpha: float, beta: float, k: float) -> float:
    """Adjusted rejection threshold gamma(alpha) = max((alpha - beta)/2^k, 0)."""
    if not 0.0 <= alpha <= 1.0 or not 0.0 <= beta <= 1.0:
        raise ValueError("alpha and beta must lie in [0, 1]")
    if k < 0.0:
        raise ValueError("k must be non-negative")
    if math.isinf(k):
        return 0.0
    return max((alpha - beta) / 2.0**k, 0.0)


@dataclass(frozen=True)
class MaxInfoParams:
    """The correction triple: privacy budget, rounds, and slack beta."""

    eps: float
    T: int
    beta: float

    @property
    def k_bits(self) -> float:
        return max_info_bound(self.eps, self.T, self.beta)

    def gamma(self, alpha: float) -> float:
        return pvalue_correction(alpha, self.beta, self.k_bits)


def corrected_test(result: TestResult, eps: float, T: int, beta: float,
                   alpha: float) -> TestResult:
    """Attach the max-information-corrected threshold and reject flags."""
    gamma = MaxInfoParams(eps, T, beta).gamma(alpha)
    return replace(
        result,
        corrected_threshold=gamma,
        reject_raw=bool(result.p_value <= alpha),
        reject_corrected=bool(result.p_value <= gamma),
    )


def most_pulled_arm(record: RunRecord) -> int:
    """Arm with the largest pull count; ties go to the lowest index."""
    return int(np.argmax(record.arm_counts))


def adaptive_t_statistic(record: RunRecord, mu0: float) -> float:
    """Standardized sum (sum y - N mu0) / sqrt(N) at the most-pulled arm."""
    i_star = most_pulled_arm(record)
    n = record.arm_counts[i_star]
    return float((record.arm_sums[i_star] - n * mu0) / math.sqrt(n))


def adaptive_t_test(record: RunRecord, mu0: float, null_sd: float) -> TestResult:
    """One-sided p-value for the adaptive t statistic under a normal null.

    null_sd is the per-observation standard deviation under the null, so the
    statistic divided by null_sd is approximately standard normal.
    """
    if null_sd <= 0.0:
        raise ValueError("null_sd must be positive")
    stat = adaptive_t_statistic(record, mu0)
    p = 1.0 - norm_cdf(stat / null_sd)
    return TestResult(stat, p, f"most-pulled-arm mean == {mu0:g}")


def ks_uniform_distance(values) -> float:
    """Kolmogorov-Smirnov distance between an empirical sample and U[0, 1]."""
    xs = np.sort(np.asarray(values, dtype=float))
    n = len(xs)
    if n == 0:
        raise ValueError("empty sample")
    grid_hi = np.arange(1, n + 1) / n
    grid_lo = np.arange(0, n) / n
    return float(max(np.max(grid_hi - xs), np.max(xs - grid_lo)))
