import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from setvote import Interval, IntervalUnion, MedianOfMeans, Rule, VoteMerger, merge, merge_majority

NESTED = [Interval(0, 10), Interval(1, 9), Interval(3, 6)]


class TestDispatch:
    @pytest.mark.parametrize("rule", [r.value for r in Rule])
    def test_every_rule(self, rule):
        sets = [Interval(0, 2), Interval(1, 3), Interval(1.5, 3.5)]
        out = merge(sets, rule, tau=0.5, seed=0, alpha=0.1, chain=())
        assert out.rule.value == rule

    def test_majority(self):
        assert merge(NESTED).merged == merge_majority(NESTED).merged

    def test_missing_args(self):
        with pytest.raises(ValueError):
            merge(NESTED, "tau")
        with pytest.raises(ValueError):
            merge(NESTED, "independent")
        with pytest.raises(ValueError):
            merge(NESTED, "no-such-rule")


class TestVoteMerger:
    def test_fit_predict(self):
        X = np.array([[0, 10], [1, 9], [3, 6]])
        m = VoteMerger().fit(X)
        assert m.merged_ == IntervalUnion.of(Interval(1, 9)) and m.n_sets_ == 3
        assert m.predict([0.5, 5]).tolist() == [False, True]
        assert m.score([0.5, 5, 8, 9.5]) == 0.5

    def test_weights_and_infinity(self):
        X = np.array([[0, 1], [5, np.inf]])
        m = VoteMerger(rule="weighted", random_state=0).fit(X, sample_weight=[0.7, 0.3])
        assert m.outcome_.seed == 0
        assert VoteMerger().fit(X).merged_.is_empty

    def test_clone_and_params(self):
        m = VoteMerger(rule="tau", tau=0.25)
        assert clone(m).get_params() == {"rule": "tau", "tau": 0.25, "alpha": None, "random_state": None}

    def test_errors(self):
        with pytest.raises(NotFittedError):
            VoteMerger().predict([0])
        with pytest.raises(ValueError):
            VoteMerger().fit(np.zeros((3, 3)))
        with pytest.raises(ValueError):
            VoteMerger().fit([[0, np.nan]])
        with pytest.raises(ValueError):
            VoteMerger().fit([[2, 1]])


class TestMedianOfMeans:
    def test_single_repeat(self):
        x = np.random.default_rng(0).standard_t(3, size=210)
        est = MedianOfMeans(n_buckets=21, random_state=4).fit(x)
        assert est.estimates_.shape == (1,) and est.location_ == est.estimates_[0]

    def test_repeats(self):
        x = np.random.default_rng(0).standard_t(3, size=210)
        est = MedianOfMeans(n_buckets=21, n_repeats=25, random_state=4).fit(x)
        assert est.path_.shape == (25,)
        assert est.location_ == sorted(est.estimates_)[12]
        again = MedianOfMeans(n_buckets=21, n_repeats=25, random_state=4).fit(x)
        assert again.location_ == est.location_

    def test_errors(self):
        with pytest.raises(ValueError):
            MedianOfMeans(n_repeats=0).fit(np.ones(20))
        with pytest.raises(ValueError):
            MedianOfMeans(n_buckets=50).fit(np.ones(20))
