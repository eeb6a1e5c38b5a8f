import math

from hypothesis import strategies as st

from setvote import Interval

coords = st.integers(-40, 40).map(lambda i: i / 4)


@st.composite
def intervals(draw, unbounded=True):
    a, b = sorted((draw(coords), draw(coords)))
    if a == b:
        return Interval(a, b)
    lc, uc = draw(st.booleans()), draw(st.booleans())
    if unbounded and draw(st.integers(0, 9)) == 0:
        a = -math.inf
    if unbounded and draw(st.integers(0, 9)) == 0:
        b = math.inf
    return Interval(a, b, lc, uc)


def families(min_size=1, max_size=10, unbounded=True):
    return st.lists(intervals(unbounded), min_size=min_size, max_size=max_size)


def weight_lists(n):
    return st.lists(st.integers(0, 9), min_size=n, max_size=n).filter(lambda w: sum(w) > 0)


taus = st.fractions(min_value=0, max_value=1, max_denominator=24).filter(lambda t: t < 1)
units = st.floats(0, 1, allow_nan=False)
