"""Shared hypothesis strategies."""

from fractions import Fraction

from hypothesis import strategies as st

from cubeslice.cube_core import Hyperplane, HyperplaneFamily
from cubeslice.product_measure import ProductMeasure


def rationals(lo=-6, hi=6, max_den=6, nonzero=False):
    s = st.builds(Fraction, st.integers(lo * max_den, hi * max_den), st.integers(1, max_den))
    return s.filter(lambda x: x != 0) if nonzero else s


@st.composite
def planes(draw, n, skew=False):
    normal = draw(st.lists(rationals(nonzero=skew), min_size=n, max_size=n))
    return Hyperplane(normal, draw(rationals()))


@st.composite
def families(draw, max_n=6, max_k=4, skew=False):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(0, max_k))
    return HyperplaneFamily([draw(planes(n, skew)) for _ in range(k)], n)


@st.composite
def measures(draw, min_n=1, max_n=6, max_den=9):
    n = draw(st.integers(min_n, max_n))
    ps = []
    for _ in range(n):
        den = draw(st.integers(2, max_den))
        ps.append(Fraction(draw(st.integers(1, den - 1)), den))
    return ProductMeasure(ps)


def vertices(n):
    return st.lists(st.sampled_from((-1, 1)), min_size=n, max_size=n).map(tuple)
