"""Epsilon-DP continual release of running sums via dyadic-epoch noise trees.

A counter ingests a stream of bounded items and can release, after every
insertion, a noisy prefix sum.  The construction is horizon free: epoch ``e``
covers the 2**e consecutive items with global indices [2**e, 2**(e+1) - 1] and
carries its own complete binary tree of noise nodes.  Within an epoch of
length L every item touches at most ceil(log2 L) + 1 nodes, each noised with
Laplace scale (levels / epsilon), so the per-item privacy loss inside its
epoch is epsilon; items belong to exactly one epoch, hence the whole stream
is epsilon-DP by parallel composition across epochs.

A prefix query at time t sums the roots of all completed epochs plus the
dyadic decomposition of the current epoch's prefix, giving
floor(log2 t) + popcount(r) noise terms (r = position inside the epoch),
which is at most 2*ceil(log2 t) + 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "laplace_inv_cdf",
    "epoch_of",
    "epoch_position",
    "dyadic_spans",
    "release_spans",
    "release_node_count",
    "noise_bound",
    "vector_noise_bound",
    "TreeCounter",
    "VectorTreeCounter",
    "BudgetAccountant",
]


def laplace_inv_cdf(u: float, b: float) -> float:
    """Quantile function of the centered Laplace distribution with scale b.

    Deterministic sampler core: composing with a uniform stream on (0, 1)
    yields seeded, reproducible Laplace draws.
    """
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must lie in (0, 1), got {u}")
    if b <= 0.0:
        raise ValueError(f"scale must be positive, got {b}")
    half = u - 0.5
    if half == 0.0:
        return 0.0
    return math.copysign(-b * math.log1p(-2.0 * abs(half)), half)


def epoch_of(t: int) -> int:
    """Epoch index of the t-th item (epoch e covers items 2**e .. 2**(e+1)-1)."""
    if t < 1:
        raise ValueError("item index starts at 1")
    return t.bit_length() - 1


def epoch_position(t: int) -> int:
    """1-based position of the t-th item inside its epoch."""
    return t - (1 << epoch_of(t)) + 1


def dyadic_spans(r: int) -> list[tuple[int, int]]:
    """Decompose the prefix [1..r] into maximal aligned dyadic blocks.

    Returns popcount(r) spans; span boundaries follow the binary expansion
    of r from the most significant bit down.
    """
    if r < 1:
        raise ValueError("prefix length must be >= 1")
    spans = []
    lo = 1
    for j in range(r.bit_length() - 1, -1, -1):
        if r >> j & 1:
            spans.append((lo, lo + (1 << j) - 1))
            lo += 1 << j
    return spans


def release_spans(t: int) -> list[tuple[int, int, int]]:
    """Noise nodes (epoch, lo, hi) contributing to the prefix release at time t.

    Completed epochs contribute their root; the current epoch contributes the
    dyadic decomposition of its prefix.  Spans are epoch-local 1-based.
    """
    e = epoch_of(t)
    nodes = [(j, 1, 1 << j) for j in range(e)]
    nodes.extend((e, lo, hi) for lo, hi in dyadic_spans(epoch_position(t)))
    return nodes


def release_node_count(t: int) -> int:
    return epoch_of(t) + bin(epoch_position(t)).count("1")


def _levels(epoch: int) -> int:
    """Tree depth of an epoch: items per node path, hence the budget divisor."""
    return epoch + 1


def noise_bound(t: int, eps: float, delta_fail: float) -> float:
    """High-probability radius for |released sum - true sum| at time t.

    Derivation: the release error is a sum of m = release_node_count(t)
    independent Laplace terms, the node for epoch j having scale
    (j + 1) / eps.  A single Laplace(b) satisfies P(|X| > b ln(1/q)) = q, so
    with per-node failure q = delta_fail / m a union bound gives
        |error| <= ln(m / delta_fail) * sum_of_scales
    with probability at least 1 - delta_fail.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if not 0.0 < delta_fail < 1.0:
        raise ValueError(f"delta_fail must lie in (0, 1), got {delta_fail}")
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if math.isinf(eps):
        return 0.0
    # closed form of the release_spans sums: the completed-epoch roots have
    # levels 1..e and the popcount(r) current-epoch nodes have level e + 1
    e = t.bit_length() - 1
    pc = bin(t - (1 << e) + 1).count("1")
    scale_sum = (e * (e + 1) // 2 + pc * (e + 1)) / eps
    return scale_sum * math.log((e + pc) / delta_fail)


def vector_noise_bound(
    t: int, eps: float, delta_fail: float, d: int, l1_bound: float
) -> float:
    """High-probability radius for the l2 norm of a vector counter's error.

    Every coordinate is an independent copy of the scalar mechanism with
    sensitivity l1_bound, so bounding each coordinate at failure
    delta_fail / d and taking the l2 norm of the box gives
        ||error||_2 <= sqrt(d) * l1_bound * ln(m d / delta_fail) * sum_of_scales.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if l1_bound <= 0.0:
        raise ValueError("l1_bound must be positive")
    if t < 1:
        raise ValueError("t must be >= 1")
    if not 0.0 < delta_fail < 1.0:
        raise ValueError(f"delta_fail must lie in (0, 1), got {delta_fail}")
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if math.isinf(eps):
        return 0.0
    e = t.bit_length() - 1
    pc = bin(t - (1 << e) + 1).count("1")
    scale_sum = (e * (e + 1) // 2 + pc * (e + 1)) / eps
    return (math.sqrt(d) * l1_bound * scale_sum
            * math.log((e + pc) * d / delta_fail))


class _Epoch:
    """One dyadic epoch: item prefix sums plus memoized node noise."""

    __slots__ = ("index", "length", "cumsums", "noise", "noisy_prefix")

    def __init__(self, index: int, zero):
        self.index = index
        self.length = 1 << index
        self.cumsums = [zero]          # cumsums[i] = sum of first i items
        self.noise: dict[tuple[int, int], object] = {}
        self.noisy_prefix: dict[int, object] = {}

    @property
    def n_items(self) -> int:
        return len(self.cumsums) - 1

    @property
    def full(self) -> bool:
        return self.n_items == self.length

    def add(self, item) -> None:
        self.cumsums.append(self.cumsums[-1] + item)

    def span_sum(self, lo: int, hi: int):
        return self.cumsums[hi] - self.cumsums[lo - 1]


class _BaseCounter:
    """Shared machinery for the scalar and vector counters."""

    def __init__(self, epsilon: float, seed=None):
        if epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {epsilon}")
        self.epsilon = epsilon
        self._rng = np.random.default_rng(seed)
        self._epochs: list[_Epoch] = []
        self._t = 0
        self._completed_total = None  # set on first add (needs _zero())

    @property
    def t(self) -> int:
        return self._t

    def _zero(self):
        raise NotImplementedError

    def _draw(self, scale: float):
        raise NotImplementedError

    def _validate(self, item):
        raise NotImplementedError

    def _noise_scale(self, epoch: int) -> float:
        if math.isinf(self.epsilon):
            return 0.0
        return _levels(epoch) / self.epsilon

    def _node_noise(self, epoch: _Epoch, lo: int, hi: int):
        key = (lo, hi)
        if key not in epoch.noise:
            scale = self._noise_scale(epoch.index)
            epoch.noise[key] = self._zero() if scale == 0.0 else self._draw(scale)
        return epoch.noise[key]

    def add(self, item) -> None:
        item = self._validate(item)
        if self._completed_total is None:
            self._completed_total = self._zero()
        if not self._epochs or self._epochs[-1].full:
            self._epochs.append(_Epoch(len(self._epochs), self._zero()))
        epoch = self._epochs[-1]
        epoch.add(item)
        self._t += 1
        if epoch.full:
            # fold the finished epoch into a running total via its root node
            self._completed_total = (
                self._completed_total + self._noisy_prefix(epoch, epoch.length)
            )

    def _noisy_prefix(self, epoch: _Epoch, r: int):
        """Noisy sum of the epoch's first r items, built along the dyadic
        chain r -> r - lowbit(r) so each value costs one node."""
        cached = epoch.noisy_prefix.get(r)
        if cached is None:
            prev = r & (r - 1)
            lo = prev + 1
            cached = epoch.span_sum(lo, r) + self._node_noise(epoch, lo, r)
            if prev:
                cached = cached + self._noisy_prefix(epoch, prev)
            epoch.noisy_prefix[r] = cached
        return cached

    def release(self):
        """Noisy prefix sum over all items inserted so far.

        Equals the exact sum plus one noise term per node of
        release_spans(t): completed epochs contribute their root, the
        current epoch the dyadic decomposition of its prefix.
        """
        if self._t == 0:
            raise ValueError("cannot release from an empty counter")
        current = self._epochs[-1]
        if current.full:
            return self._completed_total
        return self._completed_total + self._noisy_prefix(current,
                                                          current.n_items)

    def node_ledger(self) -> str:
        """JSON audit dump of every drawn noise node."""
        entries = []
        for epoch in self._epochs:
            for (lo, hi), noise in sorted(epoch.noise.items()):
                entries.append(
                    {
                        "epoch": epoch.index,
                        "span": [lo, hi],
                        "scale": self._noise_scale(epoch.index),
                        "noise": noise if isinstance(noise, float)
                        else [float(v) for v in noise],
                    }
                )
        return json.dumps({"epsilon": self.epsilon, "t": self._t, "nodes": entries})


class TreeCounter(_BaseCounter):
    """Epsilon-DP continual prefix sums of scalars in [0, 1]."""

    def _zero(self) -> float:
        return 0.0

    def _draw(self, scale: float) -> float:
        u = self._rng.random()
        while u == 0.0:
            u = self._rng.random()
        return laplace_inv_cdf(u, scale)

    def _validate(self, item) -> float:
        item = float(item)
        if not 0.0 <= item <= 1.0:
            raise ValueError(f"item {item} outside [0, 1]: sensitivity violation")
        return item


class VectorTreeCounter(_BaseCounter):
    """Epsilon-DP continual prefix sums of d-vectors with bounded l1 norm.

    Per-coordinate Laplace noise at scale l1_bound * levels / epsilon.
    """

    def __init__(self, epsilon: float, d: int, l1_bound: float, seed=None):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        if l1_bound <= 0.0:
            raise ValueError("l1_bound must be positive")
        super().__init__(epsilon, seed)
        self.d = d
        self.l1_bound = l1_bound

    def _zero(self) -> np.ndarray:
        return np.zeros(self.d)

    def _draw(self, scale: float) -> np.ndarray:
        u = self._rng.random(self.d)
        while np.any(u == 0.0):
            u[u == 0.0] = self._rng.random(np.count_nonzero(u == 0.0))
        half = u - 0.5
        return np.sign(half) * (-scale * self.l1_bound) * np.log1p(-2.0 * np.abs(half))

    def _validate(self, item) -> np.ndarray:
        item = np.asarray(item, dtype=float)
        if item.shape != (self.d,):
            raise ValueError(f"expected a vector of dimension {self.d}")
        norm = float(np.abs(item).sum())
        if norm > self.l1_bound + 1e-12:
            raise ValueError(
                f"item l1 norm {norm} exceeds declared bound {self.l1_bound}"
            )
        return item


@dataclass
class BudgetAccountant:
    """Ledger of (mechanism, epsilon, delta) charges under basic composition."""

    charges: list[tuple[str, float, float]] = field(default_factory=list)

    def charge(self, mechanism: str, eps: float, delta: float = 0.0) -> None:
        if eps < 0.0 or delta < 0.0:
            raise ValueError("privacy charges must be non-negative")
        self.charges.append((mechanism, eps, delta))

    def total_epsilon(self) -> float:
        return sum(c[1] for c in self.charges)

    def total_delta(self) -> float:
        return sum(c[2] for c in self.charges)
