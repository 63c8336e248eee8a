import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import enumerate_regularity, indicator, minkowski_hull_grid

from meaneq.exceptions import IntervalError
from meaneq.functions import GridFunction
from meaneq.intervals import (
    Interval,
    IntervalUnion,
    half_sum,
    regularity_holds,
    sum_with_interval,
    zero_set,
)

U = IntervalUnion.of
O = Interval.open
C = Interval.closed
P = Interval.point


# ---------------------------------------------------------------------------
# Interval basics


def test_interval_invariants():
    with pytest.raises(IntervalError):
        Interval(1.0, 0.0)
    with pytest.raises(IntervalError):
        Interval(0.0, 0.0, True, False)
    with pytest.raises(IntervalError):
        Interval(-math.inf, 0.0, True, False)
    assert P(2.0).is_degenerate and P(2.0).contains(2.0)
    assert O(0, 1).is_open and not O(0, 1).contains(0)
    assert C(0, 1).contains(1)


def test_union_normalizes_adjacent_and_overlapping_parts():
    u = U(O(2, 3), C(0, 1), Interval(1, 2, False, True))
    assert u == U(Interval(0, 3, True, False))
    assert U(O(0, 1), O(1, 2)).parts == (O(0, 1), O(1, 2))
    assert U(O(0, 1), P(1), O(1, 2)) == U(O(0, 2))
    assert U() == IntervalUnion.empty()


def test_complement_and_closure_relative_to_domain():
    dom = O(0, 3)
    z = U(Interval(1, 2, True, False))
    assert z.complement(dom) == U(Interval(0, 1, False, False), Interval(2, 3, True, False))
    assert U(O(0, 1)).closure(dom) == U(Interval(0, 1, False, True))


def test_serialized_form_round_trips():
    from meaneq.io import union_from_json, union_to_json

    u = U(Interval(-math.inf, -1, False, True), P(0.5), O(2, math.inf))
    obj = union_to_json(u)
    assert obj[0]["lo"] == "-inf" and obj[-1]["hi"] == "inf"
    assert union_from_json(obj) == u


# ---------------------------------------------------------------------------
# sum_with_interval / half_sum


def test_sum_example_formula():
    assert sum_with_interval(U(O(0, 1)), O(0, 2)) == U(O(0, 3))


def test_sum_example_empty():
    assert sum_with_interval(IntervalUnion.empty(), O(0, 1)).is_empty


def test_sum_example_against_grid_oracle():
    A = U(P(2), O(5, 6))
    got = sum_with_interval(A, O(-1, 1))
    assert got == U(O(1, 7))
    spec_a = [(2000, 2000, True, True), (5000, 6000, False, False)]
    lo, hi = minkowski_hull_grid(spec_a, [(-1000, 1000, False, False)], -12000, 12000)
    assert abs(lo / 1000 - 1) <= 2e-3 and abs(hi / 1000 - 7) <= 2e-3


def test_sum_extended_reals():
    got = sum_with_interval(U(Interval(-math.inf, 0, False, True)), O(0, 1))
    assert got == U(O(-math.inf, 1))


def test_sum_rejects_bad_interval():
    with pytest.raises(IntervalError):
        sum_with_interval(U(O(0, 1)), C(0, 1))
    with pytest.raises(IntervalError):
        sum_with_interval(U(O(0, 1)), P(0))


def test_half_sum_examples():
    assert half_sum(U(O(0, 1)), O(0, 2)) == U(O(0, 1.5))
    assert half_sum(IntervalUnion.empty(), O(0, 1)).is_empty
    assert half_sum(U(O(-1, 0)), O(-1, 3)) == U(O(-1, 1.5))
    lo, hi = minkowski_hull_grid([(-1000, 0, False, False)], [(-1000, 3000, False, False)], -4000, 4000)
    assert abs(lo / 2000 + 1) <= 1.01e-3 and abs(hi / 2000 - 1.5) <= 1.01e-3


def test_sum_is_single_interval_when_a_inside_i():
    # a subset of I plus I has no gaps
    spec_a = [(100, 300, True, False), (700, 800, False, True)]
    conv_mask = np.convolve(
        indicator(spec_a, 0, 1000).astype(float), indicator([(0, 1000, False, False)], 0, 1000).astype(float)
    )
    support = np.flatnonzero(conv_mask > 0.5)
    assert np.all(np.diff(support) == 1)


endpoints = st.integers(-200, 200)


@st.composite
def unions(draw, max_parts=4):
    ks = sorted(draw(st.sets(endpoints, min_size=2, max_size=2 * max_parts)))
    if len(ks) % 2:
        ks = ks[:-1]
    parts = []
    for a, b in zip(ks[::2], ks[1::2]):
        kind = draw(st.sampled_from(["open", "closed", "lo", "hi", "point"]))
        a, b = a / 20, b / 20
        parts.append(
            {
                "open": O(a, b),
                "closed": C(a, b),
                "lo": Interval(a, b, True, False),
                "hi": Interval(a, b, False, True),
                "point": P(a),
            }[kind]
        )
    return IntervalUnion(parts)


@st.composite
def open_intervals(draw):
    a, b = sorted(draw(st.sets(endpoints, min_size=2, max_size=2)))
    return O(a / 20, b / 20)


@settings(max_examples=200, deadline=None)
@given(unions(), unions(), open_intervals())
def test_sum_is_monotone(A, B, I):
    big = A.union(B)
    assert sum_with_interval(A, I).issubset(sum_with_interval(big, I))


@settings(max_examples=200, deadline=None)
@given(unions(), open_intervals(), st.data())
def test_sum_unchanged_between_a_and_its_closed_hull(A, I, data):
    hull = A.closed_hull().parts[0]
    lo = data.draw(st.floats(float(hull.lo), float(hull.hi)))
    hi = data.draw(st.floats(lo, float(hull.hi)))
    B = A.union(C(lo, hi))
    assert A.issubset(B) and B.issubset(A.closed_hull())
    assert sum_with_interval(A, I) == sum_with_interval(B, I)


@settings(max_examples=200, deadline=None)
@given(unions(), open_intervals())
def test_half_sum_halves_sum(A, I):
    s, h = sum_with_interval(A, I).parts[0], half_sum(A, I).parts[0]
    assert h.lo == s.lo / 2 and h.hi == s.hi / 2 and h.is_open


# ---------------------------------------------------------------------------
# zero_set


def test_zero_set_constant_zero():
    f = GridFunction(0.0, 0.01, np.zeros(101))
    assert zero_set(f, 0.0) == U(C(0, 1))


def test_zero_set_linear():
    on = GridFunction(-1.0, 0.5, [-1, -0.5, 0, 0.5, 1])
    assert zero_set(on, 0.0) == U(P(0.0))
    off = GridFunction(-1.0, 0.4, np.linspace(-1, 1, 6))
    assert zero_set(off, 0.0).is_empty


def test_zero_set_sin_direct_evaluation():
    x = 0.5 * np.arange(7)
    f = GridFunction(0.0, 0.5, np.sin(np.pi * x))
    expected = [xi for xi in x if abs(math.sin(math.pi * xi)) <= 1e-12]
    assert zero_set(f, 1e-12) == U(*[P(v) for v in expected])
    assert [p.lo for p in zero_set(f, 1e-12)] == [0.0, 1.0, 2.0, 3.0]


def test_zero_set_default_tolerance_is_relative():
    f = GridFunction(0.0, 1.0, [1e6, 1e-4, 1e6])
    assert zero_set(f) == U(P(1.0))


def test_zero_set_rejects_negative_tol():
    with pytest.raises(ValueError):
        zero_set(GridFunction(0.0, 1.0, [1.0]), -1.0)


# ---------------------------------------------------------------------------
# regularity_holds


def test_regularity_empty_zero_set():
    assert regularity_holds(IntervalUnion.empty(), O(0, 1))


def test_regularity_closed_zero_set():
    assert regularity_holds(U(C(0.2, 0.4), P(0.7)), O(0, 1))


def test_regularity_set_algebra_examples():
    assert regularity_holds(U(Interval(1, 2, True, False)), O(0, 3))
    assert enumerate_regularity([(Fraction(1), Fraction(2), True, False)], (0, 3))
    assert not regularity_holds(U(O(0, 1), O(1, 2)), O(0, 2))
    assert not enumerate_regularity(
        [(Fraction(0), Fraction(1), False, False), (Fraction(1), Fraction(2), False, False)], (0, 2)
    )


def test_regularity_rejects_outside_zero_set():
    with pytest.raises(IntervalError):
        regularity_holds(U(C(0, 2)), O(0, 1))


@st.composite
def zero_sets_in_domain(draw):
    ks = sorted(draw(st.sets(st.integers(1, 23), min_size=2, max_size=6)))
    if len(ks) % 2:
        ks = ks[:-1]
    parts, spec = [], []
    for a, b in zip(ks[::2], ks[1::2]):
        lc, hc = draw(st.booleans()), draw(st.booleans())
        parts.append(Interval(a / 8, b / 8, lc, hc))
        spec.append((Fraction(a, 8), Fraction(b, 8), lc, hc))
    return IntervalUnion(parts), spec


@settings(max_examples=200, deadline=None)
@given(zero_sets_in_domain())
def test_regularity_matches_enumeration(zs):
    zf, spec = zs
    assert regularity_holds(zf, O(0, 3)) == enumerate_regularity(spec, (0, 3))


@settings(max_examples=100, deadline=None)
@given(zero_sets_in_domain())
def test_regularity_true_for_closed_unions(zs):
    zf, _ = zs
    closed = IntervalUnion(C(p.lo, p.hi) for p in zf)
    assert regularity_holds(closed, O(0, 3))
