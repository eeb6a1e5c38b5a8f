import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setvote import Interval, IntervalUnion, WeightedFamily, build_profile, normalize, superlevel
from setvote.intervals import exact

import oracle
from strategies import families, intervals, taus, weight_lists


def U(*pairs):
    return IntervalUnion.of(*(Interval(a, b) for a, b in pairs))


class TestInterval:
    def test_point_and_flags(self):
        p = Interval(2, 2)
        assert p.width == 0 and p.contains(2)
        iv = Interval.from_flags(0, 1, "oc")
        assert not iv.contains(0) and iv.contains(1)
        assert Interval.from_flags(0, 1, "[)").flags == "co"

    @pytest.mark.parametrize(
        "args", [(1, 0), (1, 1, False, True), (0, float("nan")), (math.inf, math.inf)]
    )
    def test_empty_rejected(self, args):
        with pytest.raises(ValueError):
            Interval(*args)

    def test_infinite_endpoints_forced_open(self):
        iv = Interval(-math.inf, 3)
        assert not iv.lower_closed and iv.upper_closed
        assert iv.width == math.inf and not iv.is_bounded

    def test_intersect(self):
        assert Interval(0, 2).intersect(Interval(1, 3)) == Interval(1, 2)
        assert Interval(0, 1, True, False).intersect(Interval(1, 2)) is None
        assert Interval(0, 1).intersect(Interval(1, 2)) == Interval(1, 1)

    def test_bad_flag_token(self):
        with pytest.raises(ValueError):
            Interval.from_flags(0, 1, "cx")


class TestNormalize:
    def test_touching_closed_merge(self):
        assert normalize([Interval(0, 1), Interval(1, 2)]) == U((0, 2))

    def test_touching_open_stay_apart(self):
        out = normalize([Interval.open(0, 1), Interval.open(1, 2)])
        assert out.parts == (Interval.open(0, 1), Interval.open(1, 2))
        assert not out.contains(1)

    def test_unsorted_overlapping(self):
        assert normalize([Interval(3, 5), Interval(0, 1), Interval(4, 9)]) == U((0, 1), (3, 9))

    def test_empty(self):
        assert normalize([]).is_empty

    def test_half_open_touching_merge(self):
        out = normalize([Interval(0, 1, True, False), Interval(1, 2)])
        assert out == U((0, 2))

    @given(families(max_size=8))
    def test_idempotent_and_pointwise(self, sets):
        u = normalize(sets)
        assert normalize(u.parts) == u
        assert IntervalUnion(u.parts) == u
        pts = oracle.probes(sets)
        assert oracle.agrees(u, lambda s: oracle.count(sets, s) > 0, pts) == []


class TestProfile:
    def test_two_set_overlap(self):
        prof = build_profile([Interval(0, 2), Interval(1, 3)])
        got = [(str(iv), m) for iv, m in prof.segments()]
        assert got == [
            ("[0.0, 1.0)", Fraction(1, 2)),
            ("[1.0, 2.0]", Fraction(1)),
            ("(2.0, 3.0]", Fraction(1, 2)),
        ]

    def test_single_set(self):
        prof = build_profile([Interval(0, 1)])
        assert prof.mass(0) == 1 and prof.mass(1) == 1 and prof.mass(1.5) == 0

    def test_five_sets(self):
        fam = WeightedFamily.from_pairs([(0, 3), (1, 4), (2, 8), (6, 9), (7, 10)])
        prof = build_profile(fam)
        assert prof.mass(2) == prof.mass(3) == prof.mass(7.5) == Fraction(3, 5)
        assert prof.max_mass == Fraction(3, 5)
        assert superlevel(prof, Fraction(1, 2)) == U((2, 3), (7, 8))

    def test_threshold_zero_is_union(self):
        sets = [Interval(0, 1), Interval(5, 6, False, True)]
        assert superlevel(build_profile(sets), 0) == normalize(sets)

    def test_nonstrict(self):
        prof = build_profile([Interval(0, 2), Interval(1, 3)])
        assert superlevel(prof, Fraction(1, 2), strict=False) == U((0, 3))

    @settings(max_examples=300)
    @given(st.data())
    def test_oracle_weighted(self, data):
        sets = data.draw(families(max_size=12))
        w = data.draw(weight_lists(len(sets)))
        tau = data.draw(taus)
        fam = WeightedFamily(tuple(sets), w)
        out = superlevel(build_profile(fam), tau)
        wf = [Fraction(x, sum(w)) for x in w]
        pts = oracle.probes(sets)
        assert oracle.agrees(out, lambda s: oracle.mass(sets, wf, s) > tau, pts) == []
        for s in pts:
            assert build_profile(fam).mass(s) == oracle.mass(sets, wf, s)

    @given(families(max_size=8), taus, taus)
    def test_threshold_nesting(self, sets, t1, t2):
        t1, t2 = sorted((t1, t2))
        prof = build_profile(sets)
        assert superlevel(prof, t2).issubset(superlevel(prof, t1))

    @given(families(max_size=8), st.integers(0, 7), intervals(), taus)
    def test_enlarging_never_shrinks(self, sets, i, extra, tau):
        i %= len(sets)
        bigger = list(sets)
        bigger[i] = IntervalUnion.of(sets[i], extra)
        small = superlevel(build_profile(sets), tau)
        large = superlevel(build_profile(bigger), tau)
        assert small.issubset(large)


class TestUnion:
    def test_measure_contains_hull(self):
        u = U((0, 1), (3, 5))
        assert u.measure == 3
        assert u.contains(4) and not u.contains(2)
        assert u.hull() == Interval(0, 5)
        assert U((0, 1)).union(Interval(1, 4)) == U((0, 4))
        assert IntervalUnion.of(Interval(0, math.inf)).measure == math.inf

    @given(families(max_size=5), families(max_size=5))
    def test_intersection_pointwise(self, a, b):
        ua, ub = normalize(a), normalize(b)
        inter = ua.intersection(ub)
        pts = oracle.probes(a + b)
        assert oracle.agrees(inter, lambda s: ua.contains(s) and ub.contains(s), pts) == []
        assert inter.issubset(ua) and inter.issubset(ub)

    @given(families(max_size=6))
    def test_json_round_trip(self, sets):
        u = normalize(sets)
        text = json.dumps(u.to_json())
        assert IntervalUnion.from_json(json.loads(text)) == u

    def test_json_infinite(self):
        u = IntervalUnion.of(Interval(-math.inf, 0, False, False))
        obj = u.to_json()
        assert obj == {"parts": [["-inf", 0.0]], "closure": ["oo"]}


class TestWeightedFamily:
    def test_normalized_exactly(self):
        fam = WeightedFamily.from_pairs([(0, 1), (0, 2), (0, 3)], weights=[0.2, 0.3, 0.5])
        assert sum(fam.weights) == 1
        assert fam.weights == (Fraction(1, 5), Fraction(3, 10), Fraction(1, 2))
        fam = WeightedFamily.from_pairs([(0, 1), (0, 2)], weights=[2, 6])
        assert fam.weights == (Fraction(1, 4), Fraction(3, 4))

    @pytest.mark.parametrize("w", [[-1, 2], [0, 0], [1]])
    def test_bad_weights(self, w):
        with pytest.raises(ValueError):
            WeightedFamily.from_pairs([(0, 1), (0, 2)], weights=w)

    def test_levels_and_members(self):
        with pytest.raises(ValueError):
            WeightedFamily.from_pairs([(0, 1)], levels=[1.5])
        with pytest.raises(TypeError):
            WeightedFamily(((0, 1),))
        with pytest.raises(ValueError):
            WeightedFamily(())

    def test_exact_reads_decimals(self):
        assert exact(0.35) == Fraction(7, 20)
        assert exact(2 / 3) == Fraction(2, 3)
        with pytest.raises(ValueError):
            exact(math.inf)
