import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from curve_factory import random_decay
from concop.analytic import E1, exp_power
from concop.errors import BadBounds, BadParameter, NotProbOp, OrientationMismatch
from concop.monotone_graph import build_curve, invert
from concop.operator_integral import SimpleOp, alpha_zero, check_holder, integral, moment

seeds = st.integers(0, 2**32 - 1)


def _quad_moment(f, q):
    """Independent route: int_0^inf q t^(q-1) min f(t) dt by adaptive quadrature."""
    lo = lambda t: float(f.images(np.array([t]))[0][0])  # noqa: E731
    top = max(f.xs) + 1.0
    val, _ = integrate.quad(lambda t: q * t ** (q - 1) * lo(t), 0.0, top, limit=400,
                            points=[x for x in f.xs if 0 < x < top])
    return val


@settings(max_examples=100, deadline=None)
@given(seeds, st.floats(0.5, 4.0))
def test_curve_moment_matches_quadrature(seed, q):
    f = random_decay(np.random.default_rng(seed))
    assert math.isclose(moment(f, q), _quad_moment(f, q), rel_tol=1e-6, abs_tol=1e-9)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_first_moment_is_integral(seed):
    f = random_decay(np.random.default_rng(seed))
    assert math.isclose(moment(f, 1.0), integral(f), rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(integral(f), integral(invert(f)), rel_tol=1e-12, abs_tol=1e-12)


@pytest.mark.parametrize("K,c,p,q", [(1, 1, 1, 1), (1, 1, 1, 2.5), (2, 0.5, 2, 2), (3, 2, 0.5, 1.5)])
def test_exp_power_moments(K, c, p, q):
    expected = K * math.gamma(1 + q / p) / c ** (q / p)
    assert math.isclose(moment(exp_power(K, c, p), q), expected, rel_tol=1e-10)


def test_exponential_integral():
    assert math.isclose(integral(E1()), 1.0, rel_tol=1e-10)
    assert math.isclose(integral(E1(), 1.0, 2.0), math.exp(-1) - math.exp(-2), rel_tol=1e-9)


def test_staircase():
    s = SimpleOp([3.0, 1.0], [1.0, 4.0])
    assert s.integral() == 3.0 + 3.0
    assert s.integral(0.0, 2.0) == 3.0 + 1.0
    assert s.inverse().integral() == s.integral()
    assert math.isclose(integral(s.to_curve()), 6.0)
    with pytest.raises(BadParameter):
        SimpleOp([1.0, 2.0], [0.0, 1.0])
    with pytest.raises(BadBounds):
        s.integral(2.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(seeds, st.floats(0.2, 3.0), st.floats(0.1, 3.0))
def test_holder_between_moments(seed, q, gap):
    f = random_decay(np.random.default_rng(seed))
    assert check_holder(f, q, q + gap)


def test_rejections():
    up = build_curve("up", [(0.0, 0.0)], 1.0, 1.0)
    with pytest.raises(OrientationMismatch):
        integral(up)
    with pytest.raises(NotProbOp):
        moment(build_curve("down", [(0.0, 0.5), (1.0, 0.0)], "horizontal", "horizontal"), 1.0)
    with pytest.raises(BadParameter):
        moment(E1(), 0.0)
    assert alpha_zero(E1()) == 1.0
