"""Exact interval substrate: intervals, interval sets, bounds, step
functions."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rankone.measure import (
    EMPTY_SET,
    Interval,
    IntervalSet,
    MeasureBound,
    StepFunction,
    as_fraction,
    canonicalize,
    l2_inner,
    set_difference,
    set_intersection,
    set_union,
)

F = Fraction


def iv(a, b):
    return Interval(F(a), F(b))


fractions_st = st.fractions(min_value=-4, max_value=4, max_denominator=64)


@st.composite
def interval_sets(draw, max_intervals=4):
    cuts = sorted(draw(st.lists(fractions_st, min_size=2, max_size=2 * max_intervals,
                                unique=True)))
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if draw(st.booleans()):
            pieces.append(Interval(lo, hi))
    return canonicalize(pieces)


class TestAsFraction:
    def test_accepts_int_str_fraction(self):
        assert as_fraction(3) == F(3)
        assert as_fraction("2/7") == F(2, 7)
        assert as_fraction(F(1, 3)) == F(1, 3)

    def test_rejects_float(self):
        with pytest.raises(TypeError):
            as_fraction(0.5)


class TestInterval:
    def test_length_and_contains(self):
        a = iv("1/4", "3/4")
        assert a.length == F(1, 2)
        assert a.contains(F(1, 4))
        assert not a.contains(F(3, 4))  # half-open on the right
        assert not a.contains(F(0))

    def test_rejects_reversed(self):
        with pytest.raises(ValueError):
            iv(1, 0)

    def test_shift(self):
        assert iv(0, 1).shift(F(1, 2)) == iv("1/2", "3/2")


class TestCanonicalize:
    def test_merges_adjacent_and_overlapping(self):
        got = canonicalize([iv(0, "1/2"), iv("1/2", 1), iv(2, 3), iv("5/2", "7/2")])
        assert got.intervals == (iv(0, 1), iv(2, "7/2"))

    def test_drops_empty(self):
        assert canonicalize([iv(1, 1), iv(0, 1)]).intervals == (iv(0, 1),)

    def test_empty_input(self):
        assert canonicalize([]) is not None
        assert canonicalize([]).measure == 0

    @given(interval_sets())
    def test_idempotent(self, s):
        assert canonicalize(s.intervals) == s


class TestSetAlgebra:
    def test_union_intersection_difference_example(self):
        a = IntervalSet((iv(0, 1), iv(2, 3)))
        b = IntervalSet((iv("1/2", "5/2"),))
        assert set_union(a, b).intervals == (iv(0, 3),)
        assert set_intersection(a, b).intervals == (iv("1/2", 1), iv(2, "5/2"))
        assert set_difference(a, b).intervals == (iv(0, "1/2"), iv("5/2", 3))

    def test_difference_to_empty(self):
        a = IntervalSet((iv(0, 1),))
        assert set_difference(a, a) == EMPTY_SET

    @given(interval_sets(), interval_sets())
    def test_inclusion_exclusion(self, a, b):
        u = set_union(a, b)
        i = set_intersection(a, b)
        assert u.measure + i.measure == a.measure + b.measure

    @given(interval_sets(), interval_sets())
    def test_difference_partitions(self, a, b):
        assert set_difference(a, b).measure + set_intersection(a, b).measure == a.measure

    @given(interval_sets(), fractions_st)
    def test_shift_preserves_measure(self, a, t):
        assert a.shift(t).measure == a.measure

    @given(interval_sets(), interval_sets(), fractions_st)
    def test_point_membership_consistent(self, a, b, x):
        assert set_union(a, b).contains(x) == (a.contains(x) or b.contains(x))
        assert set_intersection(a, b).contains(x) == (a.contains(x) and b.contains(x))


class TestMeasureBound:
    def test_exact_and_width(self):
        mb = MeasureBound.exact(F(1, 3))
        assert mb.is_exact and mb.width == 0
        wide = MeasureBound(F(1, 4), F(1, 2))
        assert wide.width == F(1, 4)
        assert wide.contains_value(F(1, 3))
        assert not wide.contains_value(F(3, 4))

    def test_rejects_bad_order_and_negative(self):
        with pytest.raises(ValueError):
            MeasureBound(F(1, 2), F(1, 4))
        with pytest.raises(ValueError):
            MeasureBound(F(-1, 4), F(1, 4))

    def test_add_and_scale(self):
        s = MeasureBound(F(0), F(1, 4)) + MeasureBound(F(1, 8), F(1, 8))
        assert (s.lo, s.hi) == (F(1, 8), F(3, 8))
        sc = s.scale(F(2))
        assert (sc.lo, sc.hi) == (F(1, 4), F(3, 4))


class TestStepFunction:
    def test_indicator_integral(self):
        s = IntervalSet((iv(0, "1/2"), iv(1, 2)))
        f = StepFunction.indicator(s)
        assert f.integral() == F(3, 2)
        assert f.value_at(F("1/4")) == 1
        assert f.value_at(F("3/4")) == 0

    def test_add_and_inner(self):
        f = StepFunction.from_pieces([(IntervalSet((iv(0, 1),)), F(2))])
        g = StepFunction.from_pieces([(IntervalSet((iv("1/2", "3/2"),)), F(3))])
        h = f.add(g)
        assert h.value_at(F("1/4")) == 2
        assert h.value_at(F("3/4")) == 5
        assert h.value_at(F("5/4")) == 3
        assert h.integral() == f.integral() + g.integral()
        # inner product: overlap is [1/2, 1) with product 6
        assert l2_inner(f, g) == F(3)

    def test_l2_norm(self):
        f = StepFunction.from_pieces([
            (IntervalSet((iv(0, "1/2"),)), F(2)),
            (IntervalSet((iv("1/2", 1),)), F(-1)),
        ])
        assert f.l2_norm_sq() == F(4, 2) + F(1, 2)
        assert f.sup_abs() == 2

    @given(interval_sets(), interval_sets())
    def test_indicator_inner_is_intersection_measure(self, a, b):
        got = l2_inner(StepFunction.indicator(a), StepFunction.indicator(b))
        assert got == set_intersection(a, b).measure
