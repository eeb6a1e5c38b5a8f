"""Brute-force reference implementations used to check the sweep-based code.

Nothing here calls the sweep. Membership is decided from raw endpoint
comparisons and vote mass is summed with exact fractions at probe points:
every finite endpoint, the midpoint of every pair of consecutive endpoints,
and one point beyond each extreme. The vote mass is constant between
consecutive endpoints, so these probes see every distinct value.
"""

import math
from fractions import Fraction

import numpy as np

from setvote import Interval, IntervalUnion


def in_interval(iv, s):
    lo_ok = s > iv.lower or (iv.lower_closed and s == iv.lower)
    hi_ok = s < iv.upper or (iv.upper_closed and s == iv.upper)
    return lo_ok and hi_ok


def in_member(m, s):
    parts = (m,) if isinstance(m, Interval) else m.parts
    return any(in_interval(iv, s) for iv in parts)


def probes(sets):
    pts = set()
    for m in sets:
        for iv in (m,) if isinstance(m, Interval) else m.parts:
            for x in (iv.lower, iv.upper):
                if math.isfinite(x):
                    pts.add(x)
    if not pts:
        return [0.0]
    pts = sorted(pts)
    out = [pts[0] - 1.0] + pts + [pts[-1] + 1.0]
    out += [(a + b) / 2 for a, b in zip(pts, pts[1:])]
    return sorted(out)


def mass(sets, weights, s):
    if weights is None:
        weights = [Fraction(1, len(sets))] * len(sets)
    return sum((Fraction(w) for w, m in zip(weights, sets) if in_member(m, s)), Fraction(0))


def count(sets, s):
    return sum(in_member(m, s) for m in sets)


def agrees(merged, predicate, points):
    """Points where the merged set and the predicate disagree (empty when equal)."""
    return [s for s in points if merged.contains(s) != bool(predicate(s))]


def binom_quantile_exact(K, alpha):
    """Largest integer j with P(Binom(K, 1 - alpha) <= j) <= alpha, in exact rationals."""
    a = Fraction(alpha).limit_denominator(10**12)
    p = 1 - a
    cdf = Fraction(0)
    q = -1
    for j in range(K + 1):
        cdf += math.comb(K, j) * p**j * (1 - p) ** (K - j)
        if cdf > a:
            break
        q = j
    return q


def exchangeable_member(sets, tau, s):
    tau = Fraction(tau).limit_denominator(10**12)
    c = 0
    for k, m in enumerate(sets, 1):
        c += in_member(m, s)
        if not Fraction(c, k) > tau:
            return False
    return True


def exact_measure(u):
    """Lebesgue measure of a union, summed exactly from the float endpoints."""
    total = Fraction(0)
    for iv in u.parts:
        if not (math.isfinite(iv.lower) and math.isfinite(iv.upper)):
            return math.inf
        total += Fraction(iv.upper) - Fraction(iv.lower)
    return total


def random_interval(rng, unbounded_prob=0.0, grid=4, span=10):
    """Interval on a grid of 1/grid steps with random closure; sometimes unbounded."""
    while True:
        a, b = sorted(rng.integers(-span * grid, span * grid + 1, size=2) / grid)
        lc, uc = bool(rng.random() < 0.5), bool(rng.random() < 0.5)
        if rng.random() < unbounded_prob:
            a = -math.inf
        if rng.random() < unbounded_prob:
            b = math.inf
        if a == b and not (lc and uc):
            continue
        return Interval(float(a), float(b), lc, uc)


def random_family(rng, k_max=15, unbounded_prob=0.1, weighted=True, zero_weight_prob=0.1):
    K = int(rng.integers(1, k_max + 1))
    sets = [random_interval(rng, unbounded_prob) for _ in range(K)]
    if not weighted:
        return sets, None
    w = [int(x) for x in rng.integers(0, 10, size=K)]
    w = [0 if rng.random() < zero_weight_prob else x for x in w]
    if sum(w) == 0:
        w[0] = 1
    total = sum(w)
    return sets, [Fraction(x, total) for x in w]


def random_equal_width_family(rng, k_max=15):
    K = int(rng.integers(1, k_max + 1))
    width = float(rng.integers(1, 20)) / 4
    mids = rng.integers(-40, 41, size=K) / 4
    return [Interval(float(m - width / 2), float(m + width / 2)) for m in mids]


def finite_union(points):
    return IntervalUnion.of(*(Interval(float(x), float(x)) for x in points))


def as_float_list(x):
    return [float(v) for v in np.asarray(x).ravel()]
