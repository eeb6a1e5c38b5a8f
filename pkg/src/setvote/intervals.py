"""One-dimensional intervals, normalized unions of intervals and vote profiles.

Every set operation in the package goes through a single endpoint sweep.
An interval ``I`` is encoded by two *keys* on an ordered line of positions::

    (x, 0)   the point x itself
    (x, 1)   the open gap immediately to the right of x

``I`` covers every position ``k`` with ``start(I) <= k < stop(I)`` where a
closed lower endpoint starts at ``(x, 0)``, an open one at ``(x, 1)``, a closed
upper endpoint stops at ``(x, 1)`` and an open one at ``(x, 0)``.  Sorting the
keys therefore resolves ties between open and closed endpoints exactly, and
vote mass is accumulated with integer arithmetic, so the result never depends
on floating point summation order.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from numbers import Rational
from typing import Iterable, Iterator, Sequence, Union

__all__ = [
    "Interval",
    "IntervalUnion",
    "VoteProfile",
    "WeightedFamily",
    "normalize",
    "build_profile",
    "superlevel",
    "exact",
]

_MAX_DENOMINATOR = 10**12

Key = tuple  # (float, int)


def exact(x) -> Fraction:
    """Convert a number to an exact rational.

    Integers and rationals are kept as they are. Floats are read as the closest
    fraction with denominator at most 1e12, so that ``2 / 3`` or ``0.35`` mean
    what they were typed as rather than their binary approximation.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"expected a finite number, got {x!r}")
    return Fraction(x).limit_denominator(_MAX_DENOMINATOR)


def _flag(token: str) -> bool:
    if token in ("c", "[", "]"):
        return True
    if token in ("o", "(", ")"):
        return False
    raise ValueError(f"bad endpoint closure token {token!r}")


@dataclass(frozen=True)
class Interval:
    """A possibly unbounded interval of the real line.

    Infinite endpoints are always stored as open. Empty intervals cannot be
    built; a point is ``Interval(x, x)`` with both ends closed.
    """

    lower: float
    upper: float
    lower_closed: bool = True
    upper_closed: bool = True

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        lc = bool(self.lower_closed) and lo != -math.inf
        uc = bool(self.upper_closed) and hi != math.inf
        if lo == math.inf or hi == -math.inf:
            raise ValueError(f"empty interval ({lo}, {hi})")
        if lo > hi or (lo == hi and not (lc and uc)):
            raise ValueError(f"empty interval with endpoints {lo}, {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "lower_closed", lc)
        object.__setattr__(self, "upper_closed", uc)

    @classmethod
    def closed(cls, lower, upper) -> "Interval":
        return cls(lower, upper, True, True)

    @classmethod
    def open(cls, lower, upper) -> "Interval":
        return cls(lower, upper, False, False)

    @classmethod
    def from_flags(cls, lower, upper, flags: str = "cc") -> "Interval":
        """Build from a two-letter closure token such as ``"oc"`` or ``"[)"``."""
        if len(flags) != 2:
            raise ValueError(f"closure token must have two characters, got {flags!r}")
        return cls(lower, upper, _flag(flags[0]), _flag(flags[1]))

    @property
    def flags(self) -> str:
        return ("c" if self.lower_closed else "o") + ("c" if self.upper_closed else "o")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    def contains(self, x) -> bool:
        x = float(x)
        if x < self.lower or x > self.upper:
            return False
        if x == self.lower and not self.lower_closed:
            return False
        if x == self.upper and not self.upper_closed:
            return False
        return True

    __contains__ = contains

    def intersect(self, other: "Interval") -> "Interval | None":
        """Intersection with another interval, or ``None`` when empty."""
        if self.lower > other.lower:
            lo, lc = self.lower, self.lower_closed
        elif self.lower < other.lower:
            lo, lc = other.lower, other.lower_closed
        else:
            lo, lc = self.lower, self.lower_closed and other.lower_closed
        if self.upper < other.upper:
            hi, uc = self.upper, self.upper_closed
        elif self.upper > other.upper:
            hi, uc = other.upper, other.upper_closed
        else:
            hi, uc = self.upper, self.upper_closed and other.upper_closed
        if lo > hi or (lo == hi and not (lc and uc)):
            return None
        return Interval(lo, hi, lc, uc)

    def issubset(self, other: "Interval") -> bool:
        return self.intersect(other) == self

    def start_key(self) -> Key:
        return (self.lower, 0 if self.lower_closed else 1)

    def stop_key(self) -> "Key | None":
        if self.upper == math.inf:
            return None
        return (self.upper, 1 if self.upper_closed else 0)

    def __str__(self):
        return "%s%s, %s%s" % (
            "[" if self.lower_closed else "(",
            _fmt(self.lower),
            _fmt(self.upper),
            "]" if self.upper_closed else ")",
        )


def _fmt(x: float) -> str:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return repr(x)


def _interval_from_keys(start: Key, stop: "Key | None") -> Interval:
    if stop is None:
        return Interval(start[0], math.inf, start[1] == 0, False)
    return Interval(start[0], stop[0], start[1] == 0, stop[1] == 1)


def _parts_of(member) -> Iterable[Interval]:
    if isinstance(member, Interval):
        return (member,)
    if isinstance(member, IntervalUnion):
        return member.parts
    raise TypeError(f"expected Interval or IntervalUnion, got {type(member).__name__}")


@dataclass(frozen=True)
class IntervalUnion:
    """A finite union of pairwise disjoint, non-mergeable intervals in increasing order.

    The constructor normalizes whatever it is given, so two unions covering the
    same points always compare equal.
    """

    parts: tuple = ()

    def __post_init__(self):
        parts = tuple(self.parts)
        for p in parts:
            if not isinstance(p, Interval):
                raise TypeError(f"parts must be Interval instances, got {type(p).__name__}")
        if not _is_canonical(parts):
            parts = normalize(parts).parts
        object.__setattr__(self, "parts", parts)

    @classmethod
    def _trusted(cls, parts: tuple) -> "IntervalUnion":
        obj = object.__new__(cls)
        object.__setattr__(obj, "parts", parts)
        return obj

    @classmethod
    def empty(cls) -> "IntervalUnion":
        return cls._trusted(())

    @classmethod
    def of(cls, *members) -> "IntervalUnion":
        return normalize(members)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __bool__(self) -> bool:
        return bool(self.parts)

    @property
    def is_empty(self) -> bool:
        return not self.parts

    @property
    def n_parts(self) -> int:
        return len(self.parts)

    @property
    def measure(self) -> float:
        """Lebesgue measure; infinite as soon as one part is unbounded."""
        return math.fsum(p.width for p in self.parts)

    def contains(self, x) -> bool:
        x = float(x)
        i = bisect.bisect_right([p.lower for p in self.parts], x) - 1
        for j in (i, i + 1):
            if 0 <= j < len(self.parts) and self.parts[j].contains(x):
                return True
        return False

    __contains__ = contains

    def hull(self) -> "Interval | None":
        """Smallest interval containing the union."""
        if not self.parts:
            return None
        a, b = self.parts[0], self.parts[-1]
        return Interval(a.lower, b.upper, a.lower_closed, b.upper_closed)

    def intersection(self, other: "IntervalUnion | Interval") -> "IntervalUnion":
        other_parts = tuple(_parts_of(other))
        prof = _sweep([(self.parts, 1), (other_parts, 1)], scale=2)
        return superlevel(prof, Fraction(1, 2))

    def union(self, other: "IntervalUnion | Interval") -> "IntervalUnion":
        return normalize(self.parts + tuple(_parts_of(other)))

    def issubset(self, other: "IntervalUnion | Interval") -> bool:
        return self.intersection(other) == self

    def issuperset(self, other: "IntervalUnion | Interval") -> bool:
        other = other if isinstance(other, IntervalUnion) else IntervalUnion((other,))
        return other.issubset(self)

    def to_json(self) -> dict:
        return {
            "parts": [[_json_num(p.lower), _json_num(p.upper)] for p in self.parts],
            "closure": [p.flags for p in self.parts],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "IntervalUnion":
        parts = obj.get("parts", [])
        closure = obj.get("closure") or ["cc"] * len(parts)
        if len(closure) != len(parts):
            raise ValueError("closure list length does not match parts")
        return cls(
            tuple(
                Interval.from_flags(float(lo), float(hi), fl)
                for (lo, hi), fl in zip(parts, closure)
            )
        )

    def __str__(self):
        if not self.parts:
            return "{}"
        return " U ".join(str(p) for p in self.parts)


def _json_num(x: float):
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return x


def _is_canonical(parts: Sequence[Interval]) -> bool:
    for a, b in zip(parts, parts[1:]):
        if a.upper < b.lower:
            continue
        if a.upper == b.lower and not a.upper_closed and not b.lower_closed:
            continue
        return False
    return True


@dataclass(frozen=True)
class VoteProfile:
    """Piecewise constant vote mass ``g(s) = sum_k w_k 1{s in C_k}``.

    Mass on the segment starting at ``keys[i]`` (up to ``keys[i + 1]``) is
    ``votes[i] / scale``; it is zero before the first key. Votes are integers:
    weights are rescaled to a common denominator before the sweep.
    """

    keys: tuple
    votes: tuple
    scale: int
    total: int

    def mass(self, s) -> Fraction:
        i = bisect.bisect_right(self.keys, (float(s), 0)) - 1
        return Fraction(self.votes[i] if i >= 0 else 0, self.scale)

    @property
    def max_mass(self) -> Fraction:
        return Fraction(max(self.votes, default=0), self.scale)

    def segments(self) -> Iterator[tuple]:
        """Yield ``(interval, mass)`` for every segment carrying positive mass."""
        n = len(self.keys)
        for i, (k, v) in enumerate(zip(self.keys, self.votes)):
            if v:
                stop = self.keys[i + 1] if i + 1 < n else None
                yield _interval_from_keys(k, stop), Fraction(v, self.scale)


def _sweep(members: Iterable[tuple], scale: int) -> VoteProfile:
    """Accumulate integer votes; ``members`` yields ``(parts, votes_per_part)``."""
    deltas: dict = {}
    total = 0
    for parts, v in members:
        total += v
        if not v:
            continue
        for iv in parts:
            k = iv.start_key()
            deltas[k] = deltas.get(k, 0) + v
            k = iv.stop_key()
            if k is not None:
                deltas[k] = deltas.get(k, 0) - v
    keys = sorted(k for k, d in deltas.items() if d)
    votes = tuple(accumulate(deltas[k] for k in keys))
    return VoteProfile(tuple(keys), votes, scale, total)


def _threshold_votes(threshold, scale: int, strict: bool) -> int:
    """Smallest integer vote count that passes the threshold."""
    cut = exact(threshold) * scale
    if strict:
        return math.floor(cut) + 1
    return math.ceil(cut)


def superlevel(profile: VoteProfile, threshold, strict: bool = True) -> IntervalUnion:
    """Return ``{s : g(s) > threshold}`` (or ``>=`` when ``strict`` is false)."""
    need = _threshold_votes(threshold, profile.scale, strict)
    keys, votes = profile.keys, profile.votes
    out = []
    if need <= 0:
        # Mass zero off the support also passes.
        start: "Key | None" = (-math.inf, 1)
    else:
        start = None
    for i, (k, v) in enumerate(zip(keys, votes)):
        if v >= need:
            if start is None:
                start = k
        elif start is not None:
            if start != k:
                out.append(_interval_from_keys(start, k))
            start = None
    if start is not None:
        out.append(_interval_from_keys(start, None))
    return IntervalUnion._trusted(tuple(out))


def normalize(parts: Iterable) -> IntervalUnion:
    """Canonical disjoint, sorted union covering exactly the points of ``parts``."""
    members = [(tuple(_parts_of(p)), 1) for p in parts]
    if not members:
        return IntervalUnion.empty()
    return superlevel(_sweep(members, scale=1), 0)


Member = Union[Interval, IntervalUnion]


@dataclass(frozen=True)
class WeightedFamily:
    """K uncertainty sets with voting weights and optional miscoverage levels.

    Members are intervals or unions of intervals (a finite label set is a union
    of points). Weights default to uniform and are always renormalized to sum
    to one exactly; they are stored as fractions.
    """

    sets: tuple
    weights: tuple = None
    levels: tuple = None
    _votes: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        sets = tuple(self.sets)
        if not sets:
            raise ValueError("a family needs at least one set")
        for s in sets:
            if not isinstance(s, (Interval, IntervalUnion)):
                raise TypeError(f"family members must be Interval or IntervalUnion, got {type(s).__name__}")
        K = len(sets)
        if self.weights is None:
            w = (Fraction(1, K),) * K
            votes, scale = (1,) * K, K
        else:
            raw = [exact(x) for x in self.weights]
            if len(raw) != K:
                raise ValueError(f"got {len(raw)} weights for {K} sets")
            if any(x < 0 for x in raw):
                raise ValueError("weights must be nonnegative")
            total = sum(raw)
            if total <= 0:
                raise ValueError("weights must not all be zero")
            w = tuple(x / total for x in raw)
            scale = math.lcm(*(x.denominator for x in w))
            votes = tuple(int(x * scale) for x in w)
        levels = self.levels
        if levels is not None:
            levels = tuple(float(a) for a in levels)
            if len(levels) != K:
                raise ValueError(f"got {len(levels)} levels for {K} sets")
            if any(not 0 <= a <= 1 for a in levels):
                raise ValueError("levels must lie in [0, 1]")
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "_votes", (votes, scale))

    @classmethod
    def from_pairs(cls, pairs, weights=None, levels=None) -> "WeightedFamily":
        """Closed intervals from ``(lower, upper)`` pairs."""
        return cls(tuple(Interval(lo, hi) for lo, hi in pairs), weights, levels)

    @property
    def K(self) -> int:
        return len(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    @property
    def is_uniform(self) -> bool:
        votes = self._votes[0]
        return votes.count(votes[0]) == len(votes)

    @property
    def weights_float(self) -> tuple:
        return tuple(float(w) for w in self.weights)

    def uniform(self) -> "WeightedFamily":
        """Same sets with uniform weights."""
        return self if self.is_uniform else WeightedFamily(self.sets, None, self.levels)

    def subset(self, index: Sequence[int]) -> "WeightedFamily":
        """Sub-family in the given order; weights are renormalized."""
        w = None if self.is_uniform else [self.weights[i] for i in index]
        lv = None if self.levels is None else [self.levels[i] for i in index]
        return WeightedFamily(tuple(self.sets[i] for i in index), w, lv)


def build_profile(family) -> VoteProfile:
    """Vote profile of a family (a ``WeightedFamily`` or a sequence of sets)."""
    if not isinstance(family, WeightedFamily):
        family = WeightedFamily(tuple(family))
    votes, scale = family._votes
    return _sweep(((tuple(_parts_of(s)), v) for s, v in zip(family.sets, votes)), scale)
