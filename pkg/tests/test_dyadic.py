from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mfsynth.dyadic import (
    DyadicError,
    DyadicRational,
    interval,
    stretch_exponent,
    stretched_interval,
)

dyadics = st.builds(
    DyadicRational,
    st.integers(min_value=-(2**40), max_value=2**40),
    st.integers(min_value=0, max_value=50),
)


def test_canonical_form():
    assert DyadicRational(4, 2) == DyadicRational(1, 0)
    assert DyadicRational(0, 17).exp == 0
    assert DyadicRational(6, 3).num == 3


def test_parse_roundtrip():
    x = DyadicRational(5, 8)
    assert DyadicRational.parse(str(x)) == x
    with pytest.raises(DyadicError):
        DyadicRational.parse("5/3")


@given(dyadics, dyadics)
def test_add_sub_exact(a, b):
    assert (a + b) - b == a
    assert (a + b).as_fraction == a.as_fraction + b.as_fraction


@given(dyadics, dyadics)
def test_order_matches_fractions(a, b):
    assert (a < b) == (a.as_fraction < b.as_fraction)


def test_interval_basics():
    assert interval(0, 0).left == DyadicRational(0)
    assert interval(0, 0).right == DyadicRational(1)
    i = interval(3, 5)
    assert i.left.as_fraction == Fraction(5, 8)
    assert i.right.as_fraction == Fraction(6, 8)
    with pytest.raises(DyadicError):
        interval(2, 4)


def test_intervals_disjoint():
    a, b = interval(4, 3), interval(4, 4)
    assert not b.contains(a.right - DyadicRational(1, 30))
    assert b.contains(a.right)  # half-open: right endpoint of a starts b


def test_stretched_interval_exact():
    s = stretched_interval(4, 3, Fraction(1, 2))
    assert s.m == 8
    assert s.right.as_fraction == Fraction(1, 4)
    assert s.left.as_fraction == Fraction(1, 4) - Fraction(1, 256)
    assert s.length == Fraction(1, 256)


def test_stretched_alpha_one_is_whole_cell():
    s = stretched_interval(5, 7, Fraction(1))
    cell = interval(5, 7)
    assert s.left == cell.left and s.right == cell.right


def test_stretched_requires_integral_quotient():
    with pytest.raises(DyadicError):
        stretched_interval(5, 0, Fraction(2, 3))
    assert stretch_exponent(6, Fraction(2, 3)) == 9


@given(st.integers(min_value=1, max_value=20), st.data())
def test_stretched_contained_in_parent(j, data):
    k = data.draw(st.integers(min_value=0, max_value=2**j - 1))
    q = data.draw(st.integers(min_value=j, max_value=3 * j))
    alpha = Fraction(j, q)
    s = stretched_interval(j, k, alpha)
    cell = interval(j, k)
    assert cell.left.as_fraction <= s.left.as_fraction
    assert s.right == cell.right
