"""Adaptively gathered sample means are biased; private gathering fixes it.

A confidence-bound gatherer abandons an arm after unlucky draws, so the
sample means it leaves behind are biased downward.  When arm selection only
sees rewards through private counters, that feedback loop is throttled and
the bias collapses.  This is a desk-size version of the full experiment
configs in configs/ (smaller arm count and replication count).
"""

import numpy as np

from dpbandit.harness import ExperimentConfig, run_experiment

COMMON = dict(kind="stoch-bias", K=10, T=400, gap=0.05, bonus="hoeffding",
              reps=2000, base_seed=0, threads=2)

ucb_out = run_experiment(ExperimentConfig(
    policy="ucb", delta=0.015, out="/tmp/demo_bias_ucb", **COMMON))
priv_out = run_experiment(ExperimentConfig(
    policy="privucb", eps=0.05, delta=0.015, out="/tmp/demo_bias_priv",
    **COMMON))

print("per-arm bias of the gathered sample means (2000 replications)")
print(" arm   true mean   ucb bias     private bias")
ucb_rows = ucb_out.files["bias.csv"].read_text().splitlines()[1:]
priv_rows = priv_out.files["bias.csv"].read_text().splitlines()[1:]
for arm, (u, p) in enumerate(zip(ucb_rows, priv_rows)):
    ub, pb = float(u.split(",")[1]), float(p.split(",")[1])
    print(f"{arm:4d}   {1 - 0.05 * arm:9.2f}   {ub:+9.4f}   {pb:+12.4f}")

agg_u = ucb_out.manifest["summary"]["aggregate_abs_bias"]
agg_p = priv_out.manifest["summary"]["aggregate_abs_bias"]
print(f"\naggregate |bias|: ucb {agg_u:.4f}, private {agg_p:.4f} "
      f"(ratio {agg_u / agg_p:.1f}x)")
print(f"regret paid for it: ucb {ucb_out.manifest['summary']['final_regret_mean']:.1f}, "
      f"private {priv_out.manifest['summary']['final_regret_mean']:.1f}")
