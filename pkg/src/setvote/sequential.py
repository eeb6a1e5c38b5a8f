"""Order-aware merging: exchangeable and permuted vote sets, online running majority vote."""

from __future__ import annotations

import bisect
import collections
from fractions import Fraction
from itertools import accumulate
from typing import Optional, Sequence

import numpy as np

from .intervals import (
    Interval,
    IntervalUnion,
    VoteProfile,
    WeightedFamily,
    build_profile,
    exact,
    superlevel,
)
from .vote import MergeOutcome, Rule, _seed_of

__all__ = [
    "SequentialMerger",
    "merge_exchangeable",
    "merge_permuted",
    "merge_confidence_sequences",
]

HALF = Fraction(1, 2)


def _check_tau(tau) -> Fraction:
    t = exact(tau)
    if not 0 <= t < 1:
        raise ValueError(f"tau must lie in [0, 1), got {tau}")
    return t


def _sets_of(sets) -> tuple:
    if isinstance(sets, WeightedFamily):
        return sets.sets
    sets = tuple(sets)
    if not sets:
        raise ValueError("need at least one set")
    return sets


def merge_exchangeable(sets, tau=HALF) -> MergeOutcome:
    """Intersection over k of the vote sets of the first k inputs.

    The order of ``sets`` matters. The result is always contained in the
    plain vote set at the same threshold.
    """
    sets = _sets_of(sets)
    t = _check_tau(tau)
    running = None
    for k in range(1, len(sets) + 1):
        step = superlevel(build_profile(sets[:k]), t)
        running = step if running is None else running.intersection(step)
        if running.is_empty:
            break
    return MergeOutcome(running, Rule.EXCHANGEABLE, float(t))


def merge_permuted(family, seed=None, tau=HALF, *, permutation=None) -> MergeOutcome:
    """:func:`merge_exchangeable` over a uniformly random processing order."""
    sets = _sets_of(family)
    K = len(sets)
    if permutation is None:
        perm = tuple(int(i) for i in np.random.default_rng(seed).permutation(K))
    else:
        perm = tuple(int(i) for i in permutation)
        if sorted(perm) != list(range(K)):
            raise ValueError(f"not a permutation of range({K}): {perm}")
    out = merge_exchangeable([sets[i] for i in perm], tau)
    return MergeOutcome(
        out.merged,
        Rule.PERMUTED,
        out.threshold_used,
        seed=_seed_of(seed) if permutation is None else None,
        permutation=perm,
    )


class SequentialMerger:
    """Running majority vote over sets that arrive one at a time.

    After ``t`` updates :attr:`running` is the intersection of the vote sets of
    the first 1, 2, ..., t arrivals. It can only shrink. Endpoint events are
    kept in sorted order, so an update costs one insertion plus a linear pass.

    Parameters
    ----------
    tau : float, default 1/2
        Vote threshold.
    history : int or None
        Keep the last ``history`` per-step vote sets (``None`` keeps none).
    patience : int
        Number of consecutive unchanged updates after which
        :attr:`stabilized` turns true.
    """

    def __init__(self, tau=HALF, history: Optional[int] = None, patience: int = 5):
        if patience < 1:
            raise ValueError("patience must be at least 1")
        self.tau = _check_tau(tau)
        self.patience = int(patience)
        self.arrived: list = []
        self.running: Optional[IntervalUnion] = None
        self.history = collections.deque(maxlen=history) if history else None
        self.unchanged = 0
        self._keys: list = []
        self._delta: dict = {}

    @property
    def t(self) -> int:
        return len(self.arrived)

    @property
    def stabilized(self) -> bool:
        return self.unchanged >= self.patience

    def _insert(self, key, d):
        if key not in self._delta:
            bisect.insort(self._keys, key)
            self._delta[key] = 0
        self._delta[key] += d

    def update(self, new) -> IntervalUnion:
        if not isinstance(new, (Interval, IntervalUnion)):
            raise TypeError(f"expected Interval or IntervalUnion, got {type(new).__name__}")
        self.arrived.append(new)
        parts = (new,) if isinstance(new, Interval) else new.parts
        for iv in parts:
            self._insert(iv.start_key(), 1)
            stop = iv.stop_key()
            if stop is not None:
                self._insert(stop, -1)
        t = len(self.arrived)
        votes = tuple(accumulate(self._delta[k] for k in self._keys))
        profile = VoteProfile(tuple(self._keys), votes, t, t)
        step = superlevel(profile, self.tau)
        if self.history is not None:
            self.history.append(step)
        previous = self.running
        self.running = step if previous is None else previous.intersection(step)
        if previous is not None and self.running == previous:
            self.unchanged += 1
        else:
            self.unchanged = 0
        return self.running

    def extend(self, sets) -> IntervalUnion:
        for s in sets:
            self.update(s)
        return self.running


def merge_confidence_sequences(streams: Sequence[Sequence], t: Optional[int] = None, tau=HALF):
    """Majority vote across K parallel confidence sequences.

    ``streams[k][i]`` is the set reported by sequence ``k`` at time index ``i``.
    Returns the list of merged sets for every time index, or only the one at
    index ``t`` when given.
    """
    streams = [list(s) for s in streams]
    if not streams:
        raise ValueError("need at least one stream")
    lengths = {len(s) for s in streams}
    if len(lengths) != 1:
        raise ValueError(f"streams have mismatched lengths {sorted(lengths)}")
    T = lengths.pop()
    tt = _check_tau(tau)

    def at(i):
        return superlevel(build_profile([s[i] for s in streams]), tt)

    if t is not None:
        if not -T <= t < T:
            raise IndexError(f"time index {t} out of range for length {T}")
        return at(t)
    return [at(i) for i in range(T)]
