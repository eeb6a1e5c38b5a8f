"""Derandomizing split-based procedures by taking medians of repeated runs.

The median convention everywhere is the lower one, ``x_(ceil(K/2))``, so the
returned value is always one of the inputs.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .intervals import Interval

__all__ = [
    "EstimatorBatch",
    "Decision",
    "StabilizationTracker",
    "lower_median",
    "running_median",
    "momom",
    "bucket_partition",
    "mom",
    "hulc_buckets",
    "hulc_interval",
]


def lower_median(values) -> float:
    """The ``ceil(K/2)``-th order statistic."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("median of an empty sequence")
    k = (v.size + 1) // 2 - 1
    return float(np.partition(v, k)[k])


def running_median(values) -> List[float]:
    """Lower medians of every prefix, maintained with two heaps.

    ``low`` is a max-heap (stored negated) holding the ``ceil(k/2)`` smallest
    values seen so far, so its top is the lower median.
    """
    low: list = []
    high: list = []
    out = []
    for x in values:
        x = float(x)
        if low and x > -low[0]:
            heapq.heappush(high, x)
        else:
            heapq.heappush(low, -x)
        if len(low) > len(high) + 1:
            heapq.heappush(high, -heapq.heappop(low))
        elif len(high) > len(low):
            heapq.heappush(low, -heapq.heappop(high))
        out.append(-low[0])
    if not out:
        raise ValueError("running median of an empty sequence")
    return out


def momom(mom_estimates) -> float:
    """Median of median-of-means estimates from independent re-bucketings."""
    return lower_median(mom_estimates)


def bucket_partition(n: int, B: int, seed=None) -> List[np.ndarray]:
    """Random split of ``range(n)`` into B buckets; the first ``n % B`` get one extra point."""
    if not 1 <= B <= n:
        raise ValueError(f"need 1 <= B <= n, got B={B}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    size, extra = divmod(n, B)
    bounds = np.cumsum([0] + [size + (b < extra) for b in range(B)])
    return [perm[bounds[b] : bounds[b + 1]] for b in range(B)]


def mom(data, B: int, seed=None, partition: Optional[Sequence] = None) -> float:
    """Median of means over B random buckets.

    Parameters
    ----------
    data : array-like, shape (n,)
    B : int
        Number of buckets, ``1 <= B <= n``.
    seed : int, Generator or None
        Source of the random bucketing.
    partition : sequence of index arrays, optional
        Use this bucketing instead of drawing one.
    """
    x = np.asarray(data, dtype=float).ravel()
    n = x.size
    if not 1 <= B <= n:
        raise ValueError(f"need 1 <= B <= n, got B={B}, n={n}")
    if partition is None:
        if n % B == 0:
            # Equal buckets: a reshaped permutation is the same partition, faster.
            perm = np.random.default_rng(seed).permutation(n)
            means = x[perm].reshape(B, n // B).mean(axis=1)
            return lower_median(means)
        partition = bucket_partition(n, B, seed)
    means = [x[np.asarray(idx)].mean() for idx in partition]
    return lower_median(means)


def hulc_buckets(alpha: float) -> int:
    """Number of buckets ``ceil(log2(2/alpha))`` for a median-unbiased HulC."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return math.ceil(math.log2(2.0 / alpha))


def hulc_interval(data, alpha: float, seed=None, estimator: Optional[Callable] = None) -> Interval:
    """Convex hull of bucket-wise estimates.

    With a median-unbiased ``estimator`` the miscoverage is ``2 ** (1 - B)``
    for ``B = hulc_buckets(alpha)``, which is at most alpha. ``estimator`` maps
    a 1-d array to a float and defaults to the sample mean.
    """
    x = np.asarray(data, dtype=float).ravel()
    B = hulc_buckets(alpha)
    if x.size < B:
        raise ValueError(f"need at least {B} observations for alpha={alpha}, got {x.size}")
    estimator = np.mean if estimator is None else estimator
    est = [float(estimator(x[idx])) for idx in bucket_partition(x.size, B, seed)]
    return Interval(min(est), max(est))


@dataclass
class EstimatorBatch:
    """K exchangeable point estimates, optionally with a known error half-width."""

    values: Sequence[float]
    n: Optional[int] = None
    alpha: Optional[float] = None
    half_width: Optional[float] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size < 1:
            raise ValueError("need at least one estimate")
        if not np.all(np.isfinite(v)):
            raise ValueError("estimates must be finite")
        self.values = v

    @property
    def K(self) -> int:
        return self.values.size

    def median(self) -> float:
        return lower_median(self.values)

    def path(self) -> List[float]:
        return running_median(self.values)

    def intervals(self) -> List[Interval]:
        if self.half_width is None:
            raise ValueError("half_width is required to rebuild intervals")
        w = float(self.half_width)
        return [Interval(v - w, v + w) for v in self.values]


class Decision(str, enum.Enum):
    CONTINUE = "continue"
    STOP = "stop"


@dataclass
class StabilizationTracker:
    """Stop once ``patience`` consecutive jumps are below ``tolerance``."""

    tolerance: float
    patience: int = 5
    deltas: list = field(default_factory=list)
    last: Optional[float] = None
    streak: int = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")

    @property
    def stopped(self) -> bool:
        return self.streak >= self.patience

    def track(self, value) -> Decision:
        value = float(value)
        if self.last is not None:
            d = abs(value - self.last)
            self.deltas.append(d)
            self.streak = self.streak + 1 if d < self.tolerance else 0
        self.last = value
        return Decision.STOP if self.stopped else Decision.CONTINUE
