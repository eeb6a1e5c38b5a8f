import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setvote import duality_check, ruger, ruger_median, ruger_randomized

pvals = st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=20)


class TestRuger:
    def test_examples(self):
        assert ruger([0.01, 0.04, 0.5], 2) == pytest.approx(0.06)
        assert ruger([0.01, 0.04, 0.5], 1) == pytest.approx(0.03)
        assert ruger([0.5, 0.9], 1) == 1.0
        assert ruger([1, 1, 1], 2) == 1.0

    @pytest.mark.parametrize("k", [0, 4, 1.5, True])
    def test_bad_k(self, k):
        with pytest.raises(ValueError):
            ruger([0.1, 0.2, 0.3], k)

    @pytest.mark.parametrize("p", [[], [-0.1], [1.2], [float("nan")]])
    def test_bad_p(self, p):
        with pytest.raises(ValueError):
            ruger_median(p)

    def test_median_examples(self):
        assert ruger_median([0.01, 0.04, 0.5]) == pytest.approx(0.08)
        assert ruger_median([1, 1]) == 1.0
        assert ruger_median([0.2]) == pytest.approx(0.4)
        assert ruger_median([0.7]) == 1.0

    @given(pvals)
    def test_median_is_ruger_at_half(self, p):
        k = (len(p) + 1) // 2
        assert ruger_median(p) == min(1.0, 2.0 * sorted(p)[k - 1])
        if len(p) % 2 == 0:
            assert ruger_median(p) == ruger(p, k)


class TestRandomized:
    def test_examples(self):
        p = [0.01, 0.04, 0.5]
        assert ruger_randomized(p, 2, u=1) == ruger(p, 2)
        assert ruger_randomized(p, 2, u=0.4) == pytest.approx(0.015)
        with pytest.raises(ValueError):
            ruger_randomized(p, 2, u=0)

    def test_seeded(self):
        p = np.random.default_rng(0).random(9)
        assert ruger_randomized(p, 5, seed=4) == ruger_randomized(p, 5, seed=4)

    @given(pvals, st.data())
    def test_never_above_ruger(self, p, data):
        k = data.draw(st.integers(1, len(p)))
        u = data.draw(st.floats(0, 1, exclude_min=True))
        assert ruger_randomized(p, k, u=u) <= ruger(p, k)


class TestDuality:
    def test_all_large(self):
        assert duality_check(np.full((4, 3), 0.5), 0.1)

    def test_exactly_floor_half_large(self):
        P = np.array([[0.5, 0.5, 0.01, 0.01, 0.01]])
        assert duality_check(P, 0.1)

    @settings(max_examples=50)
    @given(st.integers(1, 9), st.integers(0, 2**31), st.floats(0.01, 0.5))
    def test_random_families(self, K, seed, alpha):
        P = np.random.default_rng(seed).random((100, K))
        assert duality_check(P, alpha)

    def test_validation(self):
        with pytest.raises(ValueError):
            duality_check(np.ones(3), 0.1)
        with pytest.raises(ValueError):
            duality_check(np.ones((2, 2)), 0.1, probes=[1, 1])
