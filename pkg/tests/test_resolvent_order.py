import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from curve_factory import random_curve
from concop.analytic import E1, E2, exp_power
from concop.concentration import survival_from_samples
from concop.intervals import IntervalR
from concop.monotone_graph import curves_equal
from concop.operator_algebra import op_add, op_max, op_min, op_shift_arg
from concop.resolvent_order import (
    MODES,
    interval_leq,
    interval_max,
    interval_min,
    leq_on_grid,
    op_leq,
    survival_leq,
)

seeds = st.integers(0, 2**32 - 1)
orientations = st.sampled_from(["up", "down"])
bounds = st.floats(-10, 10)


@settings(max_examples=300)
@given(bounds, bounds, bounds, bounds)
def test_interval_order_matches_endpoints(a, b, c, d):
    I, J = IntervalR.closed(min(a, b), max(a, b)), IntervalR.closed(min(c, d), max(c, d))
    assert interval_leq(I, J) == (I.lo <= J.lo and I.hi <= J.hi)
    lo, hi = interval_min([I, J]), interval_max([I, J])
    assert interval_leq(lo, I) and interval_leq(lo, J)
    assert interval_leq(I, hi) and interval_leq(J, hi)


def test_analytic_comparisons():
    assert op_leq(E1(), exp_power(2, 1, 1))
    assert not op_leq(E2(), E1())
    assert not op_leq(E1(), E2())


@settings(max_examples=200, deadline=None)
@given(seeds, orientations)
def test_reflexive_and_modes_agree(seed, o):
    rng = np.random.default_rng(seed)
    f, g = random_curve(rng, o), random_curve(rng, o)
    assert op_leq(f, f)
    verdicts = {bool(op_leq(f, g, m)) for m in MODES}
    assert len(verdicts) == 1


@settings(max_examples=200, deadline=None)
@given(seeds, orientations)
def test_antisymmetry(seed, o):
    rng = np.random.default_rng(seed)
    f, g = random_curve(rng, o), random_curve(rng, o)
    if op_leq(f, g) and op_leq(g, f):
        assert curves_equal(f, g)


@settings(max_examples=200, deadline=None)
@given(seeds, orientations, st.floats(0.0, 3.0))
def test_shift_monotonicity(seed, o, delta):
    # nondecreasing f shifted to the left is larger; nonincreasing f the other way round
    f = random_curve(np.random.default_rng(seed), o)
    moved = op_shift_arg(f, delta)
    assert op_leq(f, moved) if o == "up" else op_leq(moved, f)


@settings(max_examples=200, deadline=None)
@given(seeds, orientations)
def test_addition_is_order_preserving(seed, o):
    rng = np.random.default_rng(seed)
    f, g, h = (random_curve(rng, o) for _ in range(3))
    lo = op_min([f, g])
    left, right = op_add(lo, h), op_add(f, h)
    if not left.empty and not right.empty:
        assert op_leq(left, right)


@settings(max_examples=100, deadline=None)
@given(seeds, orientations)
def test_grid_probe_never_contradicts_certificate(seed, o):
    rng = np.random.default_rng(seed)
    f, g = random_curve(rng, o), random_curve(rng, o)
    if op_leq(f, op_max([f, g])):
        assert leq_on_grid(f, op_max([f, g]), np.linspace(-8, 8, 97))


def test_survival_against_exponential_bound():
    rng = np.random.default_rng(5)
    S = survival_from_samples(rng.exponential(size=400))
    assert survival_leq(S, exp_power(1.2, 1.0, 1.0))
    assert not survival_leq(S, exp_power(0.2, 1.0, 1.0))
