"""Valid p-values on adaptively gathered data via max-information bounds.

When the gatherer is eps-DP in the rewards, its max information with the
dataset is bounded, and rejecting at gamma(alpha) = (alpha - beta) / 2^k
instead of alpha keeps the false-rejection rate of any adaptively selected
test at or below alpha.  Here the adaptively selected statistic is the
standardized mean of whichever arm got pulled the most.
"""

import math

from dpbandit import (
    MaxInfoParams,
    RewardModel,
    adaptive_t_test,
    corrected_test,
    generate_tableau,
    interact_tableau,
    privucb_policy,
)

T, K, alpha, beta = 500, 5, 0.05, 0.01
eps = 1.0 / math.sqrt(T)

params = MaxInfoParams(eps, T, beta)
print(f"gathering budget eps = {eps:.4f} over T = {T} rounds")
print(f"max-information bound k = {params.k_bits:.3f} bits")
print(f"corrected threshold gamma({alpha}) = {params.gamma(alpha):.5f}\n")

# all arms share mean 0.5, so the most-pulled arm's null is true by design
model = RewardModel("bernoulli-arms", arm_means=(0.5,) * K)
reps = 400
raw = corrected = 0
for rep in range(reps):
    tab = generate_tableau(model, T, K, (rep, 1))
    record = interact_tableau(tab, privucb_policy(K, T, eps, seed=(rep, 2)))
    result = adaptive_t_test(record, mu0=0.5, null_sd=0.5)
    result = corrected_test(result, eps, T, beta, alpha)
    raw += result.reject_raw
    corrected += result.reject_corrected

print(f"over {reps} replications under a true null:")
print(f"  reject at alpha:        {raw / reps:.3f}")
print(f"  reject at gamma(alpha): {corrected / reps:.3f}  (guaranteed <= {alpha})")
