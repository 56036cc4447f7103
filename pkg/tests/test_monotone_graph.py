import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curve_factory import random_curve
from concop.errors import MonotonicityViolation, NotAResolvent, NotMaximal
from concop.intervals import IntervalR
from concop.monotone_graph import (
    build_curve,
    check_maximal,
    curve_from_json,
    curve_to_json,
    curves_equal,
    domain,
    eval_at,
    from_resolvent,
    invert,
    minty_check,
    range_of,
    resolvent_of,
    restrict_to,
)

seeds = st.integers(0, 2**32 - 1)
orientations = st.sampled_from(["up", "down"])


def test_rejects_wrong_direction():
    with pytest.raises(MonotonicityViolation):
        build_curve("up", [(0, 1), (1, 0)], "horizontal", "horizontal")
    with pytest.raises(MonotonicityViolation):
        build_curve("down", [(0, 0), (1, 1)], "horizontal", "horizontal")


def test_ramp_queries():
    f = build_curve("up", [(0, 0), (1, 1)], "horizontal", "vertical")
    assert domain(f) == IntervalR.make(-math.inf, 1.0)
    assert range_of(f) == IntervalR.make(0.0, math.inf)
    assert eval_at(f, 1.0) == IntervalR.make(1.0, math.inf)
    assert eval_at(f, 0.5) == IntervalR.point(0.5)
    assert eval_at(f, 2.0).is_empty


def test_missing_ray_is_not_maximal():
    f = build_curve("up", [(0, 0), (1, 1)], None, "vertical")
    assert not check_maximal(f)
    assert not minty_check(f)
    with pytest.raises(NotMaximal):
        resolvent_of(f)


@settings(max_examples=200, deadline=None)
@given(seeds, orientations)
def test_maximality_criteria_agree(seed, o):
    rng = np.random.default_rng(seed)
    f = random_curve(rng, o, maximal=bool(rng.random() < 0.7))
    assert check_maximal(f) == minty_check(f)


@settings(max_examples=200, deadline=None)
@given(seeds, orientations)
def test_double_inverse_is_identity(seed, o):
    f = random_curve(np.random.default_rng(seed), o)
    g = invert(f)
    assert curves_equal(invert(g), f)
    assert domain(g) == range_of(f) and range_of(g) == domain(f)
    assert check_maximal(g)


@settings(max_examples=200, deadline=None)
@given(seeds, orientations)
def test_resolvent_round_trip(seed, o):
    f = random_curve(np.random.default_rng(seed), o)
    J = resolvent_of(f)
    assert domain(J) == IntervalR.real_line()
    u = np.linspace(-20, 20, 401)
    lo, hi = J.images(u)
    assert np.array_equal(lo, hi)
    # single valued and 1-Lipschitz
    assert np.all(np.diff(lo) >= -1e-12) and np.all(np.diff(lo) <= np.diff(u) + 1e-9)
    assert curves_equal(from_resolvent(J, o), f)


def test_steep_curve_is_not_a_resolvent():
    J = build_curve("up", [(0, 0), (1, 2)], 1.0, 1.0)
    with pytest.raises(NotAResolvent):
        from_resolvent(J, "up")


@settings(max_examples=200, deadline=None)
@given(seeds, orientations, st.floats(-4, 4), st.floats(0, 4))
def test_restriction_stays_maximal_and_agrees_inside(seed, o, a, width):
    f = random_curve(np.random.default_rng(seed), o)
    A = IntervalR.make(a, a + width)
    g = restrict_to(f, A)
    if g.empty:
        assert A.intersect(domain(f)).is_empty
        return
    assert check_maximal(g)
    D = domain(g)
    inner = np.linspace(D.lo, D.hi, 52)[1:-1]
    if inner.size and D.hi > D.lo:
        flo, fhi = f.images(inner)
        glo, ghi = g.images(inner)
        assert np.allclose(flo, glo) and np.allclose(fhi, ghi)


@settings(max_examples=100, deadline=None)
@given(seeds, orientations)
def test_json_round_trip(seed, o):
    f = random_curve(np.random.default_rng(seed), o)
    assert curves_equal(curve_from_json(curve_to_json(f)), f)


@settings(max_examples=200, deadline=None)
@given(seeds, orientations)
def test_images_are_monotone(seed, o):
    f = random_curve(np.random.default_rng(seed), o)
    x = np.linspace(-10, 10, 301)
    lo, hi = f.images(x)
    ok = ~np.isnan(lo)
    lo, hi = lo[ok], hi[ok]
    assert np.all(lo <= hi)
    if o == "up":
        assert np.all(hi[:-1] <= lo[1:] + 1e-9)
    else:
        assert np.all(lo[:-1] >= hi[1:] - 1e-9)
