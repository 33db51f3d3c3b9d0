"""The dyadic-epoch counter: private running sums with polylog error.

Items in [0, 1] stream in one at a time; after every insertion the counter
can release a noisy prefix sum.  Noise lives on the nodes of per-epoch
binary trees, so a release at time t mixes only about 2 log2(t) Laplace
terms, and re-querying without new data returns the same value.
"""

import math

import numpy as np

from dpbandit import TreeCounter, noise_bound
from dpbandit.privacy import release_node_count

eps = 1.0
counter = TreeCounter(eps, seed=0)
rng = np.random.default_rng(42)

print(" t  exact   release   |error|  nodes   bound(5%)")
exact = 0.0
for t in range(1, 33):
    y = float(rng.random())
    counter.add(y)
    exact += y
    rel = counter.release()
    if t in (1, 2, 4, 8, 16, 24, 32):
        bound = noise_bound(t, eps, 0.05)
        print(f"{t:3d}  {exact:6.2f}  {rel:8.2f}  {abs(rel - exact):7.2f}"
              f"  {release_node_count(t):5d}  {bound:9.2f}")

# the error bound is a real coverage statement: check it by simulation
trials, t_fix = 3000, 24
bound = noise_bound(t_fix, eps, 0.05)
misses = 0
for ss in np.random.SeedSequence(7).spawn(trials):
    c = TreeCounter(eps, seed=ss)
    for _ in range(t_fix):
        c.add(0.5)
    misses += abs(c.release() - 0.5 * t_fix) > bound
print(f"\nempirical P(|error| > bound) at t={t_fix}: {misses / trials:.4f} "
      f"(promised <= 0.05)")

# releases are consistent: no fresh noise without fresh data
r1, r2 = counter.release(), counter.release()
assert r1 == r2
print("repeated release without new items is bit-identical")

# an infinite budget disables the noise entirely (handy in tests)
free = TreeCounter(math.inf, seed=0)
for y in (0.5, 0.5, 1.0):
    free.add(y)
print(f"infinite-epsilon counter releases the exact sum: {free.release()}")
