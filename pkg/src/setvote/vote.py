"""One-shot majority-vote merging rules and their analytic coverage bounds."""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .intervals import (
    Interval,
    IntervalUnion,
    WeightedFamily,
    build_profile,
    exact,
    superlevel,
)

__all__ = [
    "Rule",
    "MergeOutcome",
    "CoverageBound",
    "as_family",
    "merge_tau",
    "merge_majority",
    "merge_randomized",
    "merge_randomized_union",
    "merge_weighted",
    "binom_quantile",
    "merge_independent",
    "median_of_midpoints",
    "merge_nested_aware",
    "coverage_bounds",
]

HALF = Fraction(1, 2)


class Rule(str, enum.Enum):
    TAU = "tau"
    MAJORITY = "majority"
    RANDOMIZED = "randomized"
    RANDOMIZED_UNION = "randomized-union"
    WEIGHTED = "weighted"
    EXCHANGEABLE = "exchangeable"
    PERMUTED = "permuted"
    INDEPENDENT = "independent"
    MEDIAN_MIDPOINTS = "median-midpoints"
    NESTED_AWARE = "nested-aware"

    @property
    def randomized(self) -> bool:
        return self in (Rule.RANDOMIZED, Rule.RANDOMIZED_UNION, Rule.WEIGHTED)


@dataclass(frozen=True)
class MergeOutcome:
    """A merged set together with everything needed to audit how it was produced.

    ``randomization_value`` is the uniform draw behind a randomized threshold and
    ``permutation`` the processing order of a permuted rule; both are ``None``
    for deterministic rules. ``seed`` is the integer seed when one was given.
    """

    merged: IntervalUnion
    rule: Rule
    threshold_used: float
    randomization_value: Optional[float] = None
    seed: Optional[int] = None
    permutation: Optional[tuple] = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.threshold_used <= 1.0:
            raise ValueError(f"threshold_used must lie in [0, 1], got {self.threshold_used}")

    def contains(self, x) -> bool:
        return self.merged.contains(x)

    @property
    def measure(self) -> float:
        return self.merged.measure

    def to_json(self) -> dict:
        out = {"rule": self.rule.value, "threshold_used": self.threshold_used}
        out.update(self.merged.to_json())
        out["randomization_value"] = self.randomization_value
        out["seed"] = self.seed
        out["permutation"] = None if self.permutation is None else list(self.permutation)
        if self.metadata:
            out["metadata"] = self.metadata
        return out


@dataclass(frozen=True)
class CoverageBound:
    lower: float
    upper: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise ValueError(f"invalid coverage bound [{self.lower}, {self.upper}]")

    def __contains__(self, p) -> bool:
        return self.lower <= p <= self.upper


def as_family(family) -> WeightedFamily:
    if isinstance(family, WeightedFamily):
        return family
    return WeightedFamily(tuple(family))


def _seed_of(seed):
    return int(seed) if isinstance(seed, (int, np.integer)) else None


def draw_uniform(seed=None) -> float:
    """One Uniform[0, 1) draw from an int seed or a caller-owned generator."""
    return float(np.random.default_rng(seed).random())


def _check_u(u) -> float:
    u = float(u)
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"forced randomization value must lie in [0, 1], got {u}")
    return u


def merge_tau(family, tau) -> MergeOutcome:
    """Points whose vote mass strictly exceeds ``tau``."""
    family = as_family(family)
    t = exact(tau)
    if not 0 <= t < 1:
        raise ValueError(f"tau must lie in [0, 1), got {tau}")
    merged = superlevel(build_profile(family), t)
    return MergeOutcome(merged, Rule.TAU, float(t))


def merge_majority(family) -> MergeOutcome:
    """Points voted by more than half of the (weighted) sets."""
    family = as_family(family)
    merged = superlevel(build_profile(family), HALF)
    return MergeOutcome(merged, Rule.MAJORITY, 0.5)


def merge_randomized(family, seed=None, *, u=None) -> MergeOutcome:
    """Majority vote at the random threshold ``1/2 + U/2``.

    Never larger than :func:`merge_majority`, with the same 1 - 2 alpha
    coverage. Pass ``u`` to force the uniform draw (testing, replay).
    """
    family = as_family(family)
    u = draw_uniform(seed) if u is None else _check_u(u)
    t = HALF + exact(u) / 2
    merged = superlevel(build_profile(family), t)
    return MergeOutcome(merged, Rule.RANDOMIZED, float(t), u, _seed_of(seed))


def merge_randomized_union(family, seed=None, *, u=None) -> MergeOutcome:
    """Vote at the random threshold ``U``; coverage 1 - alpha, always a superset of C^R."""
    family = as_family(family)
    u = draw_uniform(seed) if u is None else _check_u(u)
    t = exact(u)
    merged = superlevel(build_profile(family), t)
    return MergeOutcome(merged, Rule.RANDOMIZED_UNION, float(t), u, _seed_of(seed))


def merge_weighted(family, seed=None, randomize: bool = True, *, u=None) -> MergeOutcome:
    """Weighted vote at threshold ``1/2 + U/2`` (``U = 0`` when not randomized)."""
    family = as_family(family)
    if not randomize:
        u_val = None
        t = HALF
    else:
        u_val = draw_uniform(seed) if u is None else _check_u(u)
        t = HALF + exact(u_val) / 2
    merged = superlevel(build_profile(family), t)
    return MergeOutcome(
        merged, Rule.WEIGHTED, float(t), u_val, _seed_of(seed) if randomize else None
    )


def _log_binom_pmf(K: int, j: int, p: float) -> float:
    q = 1.0 - p
    out = math.lgamma(K + 1) - math.lgamma(j + 1) - math.lgamma(K - j + 1)
    if j:
        out += j * math.log(p)
    if K - j:
        out += (K - j) * math.log(q)
    return out


def _exact_binom_cdf(K: int, j: int, p: Fraction) -> Fraction:
    q = 1 - p
    return sum(math.comb(K, i) * p**i * q ** (K - i) for i in range(j + 1))


@functools.lru_cache(maxsize=256)
def binom_quantile(K: int, alpha) -> int:
    """Largest integer ``x`` with ``F(x) <= alpha`` for ``F`` the Binom(K, 1 - alpha) CDF.

    The CDF is accumulated in log space; comparisons that land within 1e-9 of
    the boundary are settled with exact rational arithmetic.
    """
    K = int(K)
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}")
    a = exact(alpha)
    if not 0 < a < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    p = 1.0 - float(a)
    log_alpha = math.log(float(a))
    log_cdf = -math.inf
    q = -1
    for j in range(K + 1):
        log_cdf = np.logaddexp(log_cdf, _log_binom_pmf(K, j, p))
        gap = log_cdf - log_alpha
        if abs(gap) < 1e-9:
            below = _exact_binom_cdf(K, j, 1 - a) <= a
        else:
            below = gap < 0
        if not below:
            break
        q = j
    # F(0) = alpha**K <= alpha, so q >= 0 always.
    return q


def merge_independent(family, alpha) -> MergeOutcome:
    """Count rule for independent sets around a fixed target.

    Keeps points contained in more than ``binom_quantile(K, alpha)`` sets.
    Independence cannot be checked from one realization; it is recorded in the
    outcome metadata as a caller assertion. Weights are ignored.
    """
    family = as_family(family).uniform()
    K = family.K
    q = binom_quantile(K, alpha)
    t = Fraction(q, K)
    merged = superlevel(build_profile(family), t)
    meta = {
        "assumption": "caller asserts independent sets and a fixed target",
        "binomial_quantile": q,
        "alpha": float(alpha),
    }
    return MergeOutcome(merged, Rule.INDEPENDENT, float(t), metadata=meta)


def _as_intervals(sets) -> list:
    if isinstance(sets, WeightedFamily):
        sets = sets.sets
    out = []
    for s in sets:
        if isinstance(s, IntervalUnion):
            if s.n_parts != 1:
                raise ValueError("median of midpoints needs interval inputs")
            s = s.parts[0]
        if not isinstance(s, Interval):
            raise TypeError(f"expected Interval, got {type(s).__name__}")
        out.append(s)
    if not out:
        raise ValueError("need at least one interval")
    return out


def median_of_midpoints(sets, rtol: float = 1e-9) -> IntervalUnion:
    """Interval centred at the median midpoint of equal-width intervals.

    For even K this is the intersection of the two intervals with the middle
    midpoints. The result always contains the majority vote set and equals it
    whenever all inputs share a point. Ties between midpoints are resolved by
    counting votes at the shared endpoint, so that containment holds even when
    tied intervals differ only in their endpoint closure.
    """
    ivs = _as_intervals(sets)
    widths = [iv.width for iv in ivs]
    if not all(math.isfinite(w) for w in widths):
        raise ValueError("median of midpoints needs bounded intervals")
    w0 = max(widths)
    if any(abs(w - w0) > rtol * max(abs(w0), 1e-300) for w in widths) and w0 > 0:
        raise ValueError("median of midpoints needs intervals of equal width")
    K = len(ivs)
    ivs = sorted(ivs, key=lambda iv: iv.midpoint)
    mids = [iv.midpoint for iv in ivs]
    if K % 2:
        lo_idx = hi_idx = K // 2
    else:
        lo_idx, hi_idx = K // 2 - 1, K // 2
    m_hi, m_lo = mids[hi_idx], mids[lo_idx]
    # Lower end comes from the interval with the larger middle midpoint.
    n_below = sum(m < m_hi for m in mids)
    n_closed = sum(iv.lower_closed for iv, m in zip(ivs, mids) if m == m_hi)
    lower, lower_closed = ivs[hi_idx].lower, 2 * (n_below + n_closed) > K
    n_above = sum(m > m_lo for m in mids)
    n_closed = sum(iv.upper_closed for iv, m in zip(ivs, mids) if m == m_lo)
    upper, upper_closed = ivs[lo_idx].upper, 2 * (n_above + n_closed) > K
    if lower > upper or (lower == upper and not (lower_closed and upper_closed)):
        return IntervalUnion.empty()
    return IntervalUnion((Interval(lower, upper, lower_closed, upper_closed),))


def _as_union(s) -> IntervalUnion:
    return s if isinstance(s, IntervalUnion) else IntervalUnion((s,))


def merge_nested_aware(family, chain: Sequence[int] = ()) -> MergeOutcome:
    """Replace a declared nested chain by its smallest member, then majority vote.

    ``chain`` lists indices of sets that are claimed to be nested (in any
    order). The claim is verified; a chain that is not totally ordered by
    inclusion raises ``ValueError``.
    """
    family = as_family(family)
    chain = list(dict.fromkeys(int(i) for i in chain))
    if any(not 0 <= i < family.K for i in chain):
        raise ValueError("chain index out of range")
    if len(chain) < 2:
        out = merge_majority(family)
        return MergeOutcome(out.merged, Rule.NESTED_AWARE, 0.5, metadata={"chain": chain})
    members = sorted(chain, key=lambda i: _as_union(family.sets[i]).measure)
    for a, b in zip(members, members[1:]):
        if not _as_union(family.sets[a]).issubset(_as_union(family.sets[b])):
            raise ValueError(f"sets {a} and {b} of the declared chain are not nested")
    smallest = members[0]
    dropped = set(chain) - {smallest}
    keep = [i for i in range(family.K) if i not in dropped]
    reduced = family.subset(keep)
    merged = superlevel(build_profile(reduced), HALF)
    meta = {"chain": chain, "kept_from_chain": smallest, "reduced_indices": keep}
    return MergeOutcome(merged, Rule.NESTED_AWARE, 0.5, metadata=meta)


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


def coverage_bounds(
    K: int,
    alpha: float,
    rule="majority",
    *,
    tau: Optional[float] = None,
    weights=None,
    levels=None,
) -> CoverageBound:
    """Analytic coverage guarantee of a rule applied to K sets at level 1 - alpha.

    ``levels`` (per-set miscoverage) and ``weights`` give the mixed-level bound
    ``1 - 2 sum_k w_k alpha_k`` for the weighted and randomized rules. The upper
    bound is only informative for plain majority vote over inputs with exact
    coverage; it is clamped to [0, 1] and is 1 for every other rule.
    """
    rule = Rule(rule)
    K = int(K)
    if K < 1:
        raise ValueError("K must be at least 1")
    alpha = float(alpha)
    if levels is not None:
        levels = np.asarray(levels, dtype=float)
        if levels.shape != (K,):
            raise ValueError("need one level per set")
        w = np.full(K, 1.0 / K) if weights is None else np.asarray(weights, float) / np.sum(weights)
        eff = float(np.dot(w, levels))
    else:
        eff = alpha
    upper = 1.0
    if rule in (Rule.MAJORITY, Rule.MEDIAN_MIDPOINTS) and levels is None:
        half = math.ceil(K / 2)
        miss = alpha * K / half if K % 2 else 2 * alpha
        lower = 1 - miss
        if rule is Rule.MAJORITY:
            upper = 1 - (K * alpha - half + 1) / (K - half + 1)
    elif rule is Rule.TAU:
        if tau is None:
            raise ValueError("the tau rule needs tau")
        lower = 1 - eff / (1 - float(tau))
    elif rule in (Rule.RANDOMIZED_UNION, Rule.INDEPENDENT):
        lower = 1 - eff
    else:
        lower = 1 - 2 * eff
    lower = _clamp(lower)
    upper = max(lower, _clamp(upper))
    return CoverageBound(lower, upper)
