import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from concop.analytic import E1, E2
from concop.concentration import (
    bahr_esseen_bound,
    cap_at_one,
    classify_prob_op,
    law_survival,
    lipschitz_rescale,
    max_abs_bound,
    step_sum,
    sum_tail_bound,
    survival_from_samples,
    taylor_poly_coeffs,
)
from concop.errors import BadParameter, EmptySamples

T = np.linspace(0.0, 40.0, 801)


@settings(max_examples=200)
@given(st.lists(st.floats(-100, 100), min_size=1, max_size=50), st.floats(-120, 120))
def test_empirical_survival_counts(xs, t):
    S = survival_from_samples(xs)
    arr = np.asarray(xs)
    assert S.survival(np.array([t]))[0] == np.mean(arr > t)
    assert S.survival_ge(np.array([t]))[0] == np.mean(arr >= t)


def test_empty_samples():
    with pytest.raises(EmptySamples):
        survival_from_samples([])


@pytest.mark.parametrize("n", [2, 3, 5])
def test_sum_of_exponentials_dominated(n):
    bound = sum_tail_bound([E1()] * n).upper_value(T)
    exact = special.gammaincc(n, T)  # P(Gamma(n, 1) > t)
    assert np.all(np.minimum(bound, 1.0) >= exact - 1e-15)
    assert np.allclose(bound[1:], n * np.exp(-T[1:] / n))


@pytest.mark.parametrize("n", [1, 10, 100])
def test_max_abs_gaussian_dominated(n):
    t = T[1:]
    exact = -np.expm1(n * np.log1p(-2 * stats.norm.sf(t)))
    assert np.all(max_abs_bound("E2", n).upper_value(t) >= exact - 1e-15)


def test_rescale_and_cap():
    r = lipschitz_rescale(E2(), 3.0).upper_value(T)
    assert r[0] == math.inf  # vertical completion at the domain end
    assert np.allclose(r[1:], 2 * np.exp(-T[1:] ** 2 / 18))
    capped = cap_at_one(E2()).upper_value(T)
    assert capped.max() == 1.0 and np.all(capped <= 1.0)


def test_classification_and_law():
    assert classify_prob_op(E2()).klass in ("M_P", "M_P+")
    s = law_survival("gaussian").upper_value(np.array([0.0, 1.0]))
    assert np.allclose(s, stats.norm.sf([0.0, 1.0]))


def test_chebyshev_pair_bound():
    # for p = 2 the bound is a Chebyshev-type tail
    v = bahr_esseen_bound(2, 4.0).upper_value(np.array([10.0, 20.0]))
    assert v[0] > v[1] > 0
    assert math.isclose(v[0] / v[1], 4.0)
    with pytest.raises(BadParameter):
        bahr_esseen_bound(3, 1.0)


def test_step_sum_shifts_and_caps():
    lo, _ = step_sum(E1(), 2.0).images(np.array([1.0, 3.0]))
    assert lo[0] == 1.0 and math.isclose(lo[1], math.exp(-1.0))


@pytest.mark.parametrize("d", range(1, 11))
def test_taylor_coefficients_bounded(d):
    c = taylor_poly_coeffs(d)
    assert all(isinstance(c[i], Fraction) for i in range(1, d + 1))
    assert c[1] == 1
    assert all(c[i] <= math.e ** i for i in range(1, d + 1))


def test_taylor_coefficients_stable_across_degree():
    # the coefficient of X^i does not depend on the total degree
    assert taylor_poly_coeffs(4).as_floats() == taylor_poly_coeffs(8).as_floats()[:4]
    with pytest.raises(BadParameter):
        taylor_poly_coeffs(0)
