"""Prediction bias in linear contextual gathering, private and not.

For each fixed context, average the trained estimator's prediction error
over the replications in which that context entered the chosen arm's
training set.  Ridge-UCB gathering produces systematic per-context bias;
the reward-private variant keeps the worst context's bias inside the
e^eps - 1 privacy bound.
"""

import math

import numpy as np

from dpbandit.harness import make_positive_linear_model
from dpbandit.linear import LinUcbConfig, prediction_bias

K, d, T, reps = 2, 2, 50, 2000
model = make_positive_linear_model(K, d, T, noise_sd=0.1, seed=5)

print(f"K={K}, d={d}, T={T}, {reps} replications per estimate\n")
for label, kind, eps in (("round-robin", "round-robin", None),
                         ("ridge-UCB", "oful", None),
                         ("private ridge-UCB (eps=0.2)", "linpriv", 0.2)):
    cfg = LinUcbConfig(K, d, T, lam=1.0, delta=0.05, epsilon=eps)
    pb = prediction_bias(model, cfg, kind, arm=1, reps=reps, base_seed=3)
    z = pb.max_abs / pb.se_at_max if pb.se_at_max else float("nan")
    line = (f"{label:28s} worst-context |bias| = {pb.max_abs:.4f} "
            f"(se {pb.se_at_max:.4f}, z = {z:4.1f})")
    if eps is not None:
        line += f"  privacy bound e^eps - 1 = {math.exp(eps) - 1:.4f}"
    print(line)

print("\nnon-adaptive gathering is unbiased, adaptive gathering is not, and")
print("the private gatherer's worst context sits inside its privacy bound")
