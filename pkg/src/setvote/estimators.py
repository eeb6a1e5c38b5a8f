"""scikit-learn style front ends and a by-name dispatcher over the merging rules."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .derandomize import mom, running_median
from .intervals import Interval, WeightedFamily
from .sequential import merge_exchangeable, merge_permuted
from .vote import (
    MergeOutcome,
    Rule,
    median_of_midpoints,
    merge_independent,
    merge_majority,
    merge_nested_aware,
    merge_randomized,
    merge_randomized_union,
    merge_tau,
    merge_weighted,
)

__all__ = ["merge", "VoteMerger", "MedianOfMeans"]


def merge(family, rule="majority", *, tau=None, seed=None, alpha=None, chain=()) -> MergeOutcome:
    """Apply the merging rule named ``rule`` to ``family``.

    ``tau`` is used by the tau, exchangeable and permuted rules (default 1/2
    for the latter two), ``seed`` by the randomized and permuted rules,
    ``alpha`` by the independent rule and ``chain`` by the nested-aware rule.
    """
    rule = Rule(rule)
    if not isinstance(family, WeightedFamily):
        family = WeightedFamily(tuple(family))
    half = 0.5 if tau is None else tau
    if rule is Rule.TAU:
        if tau is None:
            raise ValueError("the tau rule needs tau")
        return merge_tau(family, tau)
    if rule is Rule.MAJORITY:
        return merge_majority(family)
    if rule is Rule.RANDOMIZED:
        return merge_randomized(family, seed)
    if rule is Rule.RANDOMIZED_UNION:
        return merge_randomized_union(family, seed)
    if rule is Rule.WEIGHTED:
        return merge_weighted(family, seed)
    if rule is Rule.EXCHANGEABLE:
        return merge_exchangeable(family, half)
    if rule is Rule.PERMUTED:
        return merge_permuted(family, seed, half)
    if rule is Rule.INDEPENDENT:
        if alpha is None:
            raise ValueError("the independent rule needs alpha")
        return merge_independent(family, alpha)
    if rule is Rule.MEDIAN_MIDPOINTS:
        return MergeOutcome(median_of_midpoints(family), Rule.MEDIAN_MIDPOINTS, 0.5)
    return merge_nested_aware(family, chain)


class VoteMerger(BaseEstimator):
    """Merge K intervals given as a ``(K, 2)`` array of endpoints.

    Parameters
    ----------
    rule : str, default="majority"
        Any :class:`~setvote.vote.Rule` value.
    tau : float or None
        Threshold for the tau, exchangeable and permuted rules.
    alpha : float or None
        Per-set miscoverage, required by the independent rule.
    random_state : int, Generator or None
        Source of randomness for the randomized and permuted rules.

    Attributes
    ----------
    outcome_ : MergeOutcome
    merged_ : IntervalUnion
    n_sets_ : int
    """

    def __init__(self, rule="majority", tau=None, alpha=None, random_state=None):
        self.rule = rule
        self.tau = tau
        self.alpha = alpha
        self.random_state = random_state

    def fit(self, X, y=None, sample_weight=None):
        # Infinite endpoints are allowed, so check_array's finiteness test is skipped.
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2 or X.shape[0] < 1:
            raise ValueError(f"expected a (K, 2) array of endpoints, got shape {X.shape}")
        if np.isnan(X).any():
            raise ValueError("endpoints must not be NaN")
        sets = tuple(Interval(lo, hi) for lo, hi in X)
        family = WeightedFamily(sets, None if sample_weight is None else tuple(sample_weight))
        self.outcome_ = merge(family, self.rule, tau=self.tau, seed=self.random_state, alpha=self.alpha)
        self.merged_ = self.outcome_.merged
        self.n_sets_ = len(sets)
        return self

    def predict(self, s):
        """Whether each point in ``s`` lies in the merged set."""
        check_is_fitted(self, "merged_")
        s = np.asarray(s, dtype=float).ravel()
        return np.array([self.merged_.contains(x) for x in s], dtype=bool)

    def score(self, s, y=None):
        """Fraction of the points ``s`` covered by the merged set."""
        return float(np.mean(self.predict(s)))


class MedianOfMeans(BaseEstimator):
    """Median of means, derandomized by repeating the bucketing ``n_repeats`` times.

    ``location_`` is the lower median of the repeated estimates and ``path_``
    its running value as repeats accumulate.
    """

    def __init__(self, n_buckets=10, n_repeats=1, random_state=None):
        self.n_buckets = n_buckets
        self.n_repeats = n_repeats
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=False).ravel()
        if self.n_repeats < 1:
            raise ValueError("n_repeats must be at least 1")
        rng = np.random.default_rng(self.random_state)
        self.estimates_ = np.array([mom(X, self.n_buckets, rng) for _ in range(self.n_repeats)])
        self.path_ = np.asarray(running_median(self.estimates_))
        self.location_ = float(self.path_[-1])
        return self
