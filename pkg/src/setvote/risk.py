"""Merging prediction sets that control a bounded monotone loss on a finite label space.

Only the weighted-indicator loss ``L(C, y) = L_y * 1{y not in C}`` is built
in. :func:`merge_loss_table` works on arbitrary per-set, per-label loss tables,
so other monotone bounded losses can be merged by computing their table first.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .intervals import Interval, IntervalUnion, WeightedFamily, exact
from .vote import _check_u, draw_uniform, _seed_of

__all__ = [
    "LossSpec",
    "LabelSetFamily",
    "RiskMergeOutcome",
    "merge_loss_table",
    "risk_merge_majority",
    "risk_merge_weighted",
    "gamma_calibrate",
]

# Loss tables repeat a handful of costs; converting each float once is enough.
_exact = lru_cache(maxsize=4096)(exact)


@dataclass(frozen=True)
class LossSpec:
    """Ordered labels, a loss bound B and a per-label miss cost in [0, B]."""

    labels: tuple
    bound: float = 1.0
    costs: Optional[tuple] = None

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels or len(set(labels)) != len(labels):
            raise ValueError("labels must be nonempty and distinct")
        B = float(self.bound)
        if not B > 0:
            raise ValueError("the loss bound must be positive")
        costs = (B,) * len(labels) if self.costs is None else tuple(float(c) for c in self.costs)
        if len(costs) != len(labels):
            raise ValueError(f"got {len(costs)} costs for {len(labels)} labels")
        if any(not 0 <= c <= B for c in costs):
            raise ValueError("costs must lie in [0, bound]")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "bound", B)
        object.__setattr__(self, "costs", costs)

    def loss(self, label_set, y) -> float:
        return 0.0 if y in label_set else self.costs[self.labels.index(y)]


@dataclass(frozen=True)
class LabelSetFamily:
    """K label sets as a boolean ``(K, n_labels)`` membership table, with weights."""

    membership: np.ndarray
    weights: tuple = None

    def __post_init__(self):
        m = np.asarray(self.membership, dtype=bool)
        if m.ndim != 2 or m.shape[0] < 1:
            raise ValueError("membership must be a (K, n_labels) table with K >= 1")
        K = m.shape[0]
        if self.weights is None:
            w = (Fraction(1, K),) * K
        else:
            raw = [exact(x) for x in self.weights]
            if len(raw) != K or any(x < 0 for x in raw) or sum(raw) <= 0:
                raise ValueError("need K nonnegative weights with positive sum")
            total = sum(raw)
            w = tuple(x / total for x in raw)
        m.setflags(write=False)
        object.__setattr__(self, "membership", m)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_sets(cls, sets: Sequence, labels: Sequence, weights=None) -> "LabelSetFamily":
        labels = list(labels)
        index = {y: i for i, y in enumerate(labels)}
        m = np.zeros((len(sets), len(labels)), dtype=bool)
        for k, s in enumerate(sets):
            for y in s:
                if y not in index:
                    raise ValueError(f"unknown label {y!r}")
                m[k, index[y]] = True
        return cls(m, weights)

    @property
    def K(self) -> int:
        return self.membership.shape[0]

    def to_family(self) -> WeightedFamily:
        """The same sets as unions of points at label positions 0, 1, ..."""
        sets = tuple(
            IntervalUnion.of(*(Interval(j, j) for j in np.flatnonzero(row))) for row in self.membership
        )
        return WeightedFamily(sets, self.weights)

    def loss_table(self, spec: LossSpec) -> np.ndarray:
        if self.membership.shape[1] != len(spec.labels):
            raise ValueError("membership table and loss spec disagree on the number of labels")
        return np.where(self.membership, 0.0, np.asarray(spec.costs)[None, :])


@dataclass(frozen=True)
class RiskMergeOutcome:
    labels: tuple
    mask: np.ndarray = field(repr=False)
    threshold: float
    averaged_loss: tuple = field(repr=False)
    auto_included: tuple = ()
    randomization_value: Optional[float] = None
    seed: Optional[int] = None

    def __contains__(self, y) -> bool:
        return y in self.labels


def merge_loss_table(losses, weights, threshold) -> tuple:
    """Labels whose weighted loss is strictly below ``threshold``.

    Arithmetic is exact, so ties at the threshold are never misjudged.
    Returns the boolean mask and the weighted losses as fractions.
    """
    L = np.asarray(losses, dtype=float)
    if L.ndim != 2 or L.shape[0] != len(weights):
        raise ValueError("losses must have one row per weight")
    t = exact(threshold)
    w = [exact(x) for x in weights]
    avg = []
    for j in range(L.shape[1]):
        avg.append(sum((wk * _exact(float(L[k, j])) for k, wk in enumerate(w) if L[k, j]), Fraction(0)))
    return np.array([a < t for a in avg], dtype=bool), tuple(avg)


def _outcome(family, spec, threshold, u=None, seed=None) -> RiskMergeOutcome:
    mask, avg = merge_loss_table(family.loss_table(spec), family.weights, threshold)
    uncovered = ~family.membership[np.asarray(family.weights) > 0].any(axis=0)
    auto = tuple(y for y, keep, miss in zip(spec.labels, mask, uncovered) if keep and miss)
    kept = tuple(y for y, keep in zip(spec.labels, mask) if keep)
    return RiskMergeOutcome(
        kept, mask, float(threshold), tuple(float(a) for a in avg), auto, u, _seed_of(seed)
    )


def risk_merge_majority(family: LabelSetFamily, spec: LossSpec, threshold=None) -> RiskMergeOutcome:
    """Labels whose (weighted) average miss cost is below ``B/2``.

    A label with cost below the threshold is kept even when no input set
    contains it; such labels are listed in ``auto_included``. A smaller
    ``threshold`` can be passed to counter that.
    """
    t = exact(spec.bound) / 2 if threshold is None else exact(threshold)
    return _outcome(family, spec, t)


def risk_merge_weighted(family: LabelSetFamily, spec: LossSpec, seed=None, *, u=None) -> RiskMergeOutcome:
    """Weighted average miss cost below the random threshold ``U B / 2``."""
    u = draw_uniform(seed) if u is None else _check_u(u)
    t = exact(u) * exact(spec.bound) / 2
    return _outcome(family, spec, t, u, seed)


def gamma_calibrate(scores, y, spec: LossSpec, alpha: float) -> float:
    """Smallest gamma whose adjusted calibration risk is at most alpha.

    The set at gamma keeps the labels with score ``>= 1 - gamma``, and the
    criterion is ``n/(n+1) * mean loss + B/(n+1) <= alpha``. The loss only
    changes where ``1 - gamma`` crosses a true-label score, so those points
    and gamma = 0 are the only candidates.

    Parameters
    ----------
    scores : array-like, shape (n, n_labels)
        Per-label model scores on the calibration points.
    y : array-like of int, shape (n,)
        Index of the true label of each calibration point.
    """
    S = np.asarray(scores, dtype=float)
    y = np.asarray(y, dtype=int).ravel()
    if S.ndim != 2 or S.shape[0] != y.size or S.shape[0] < 1:
        raise ValueError("scores must be (n, n_labels) with one true label per row")
    if S.shape[1] != len(spec.labels):
        raise ValueError("scores and loss spec disagree on the number of labels")
    if np.any((y < 0) | (y >= S.shape[1])):
        raise ValueError("true label index out of range")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    n = y.size
    B = spec.bound
    true_score = S[np.arange(n), y]
    cost = np.asarray(spec.costs)[y]

    def risk(level):
        return n / (n + 1) * float(np.mean(np.where(true_score >= level, 0.0, cost))) + B / (n + 1)

    # Larger gamma means a lower score cut, larger sets and smaller loss.
    levels = np.unique(np.clip(np.append(true_score, 1.0), 0.0, 1.0))[::-1]
    for level in levels:
        if risk(level) <= alpha:
            return float(1.0 - level)
    warnings.warn("no gamma in [0, 1] meets the risk level; returning the full label set (gamma = 1)")
    return 1.0
