import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from concop.errors import BadParameter, OutOfDomain, OutOfSupport
from concop.transport import (
    H_ab_eval,
    H_ab_inverse,
    H_ab_inverse_lower,
    density,
    exp_envelope_constants,
    h_bound_cauchy,
    h_bound_subexp,
    invert_increasing,
    quantile_transport,
    transport_derivative,
)

GAUSS, LAPLACE = density("gaussian"), density("laplace")
laws = st.sampled_from([("gaussian", None), ("laplace", None), ("subexp", 0.5), ("subexp", 0.8),
                        ("cauchy", 1.0), ("cauchy", 3.0)])


@settings(max_examples=200)
@given(laws, laws, st.floats(-8, 8))
def test_transport_is_odd_and_monotone(src, tgt, t):
    S, T = density(*src), density(*tgt)
    a = quantile_transport(S, T, t)
    assert quantile_transport(S, T, -t) == -a
    assert quantile_transport(S, T, abs(t) + 0.1) >= abs(a)


@settings(max_examples=100)
@given(laws, st.floats(-6, 6))
def test_self_transport_is_identity(law, t):
    D = density(*law)
    assert math.isclose(quantile_transport(D, D, t), t, rel_tol=1e-8, abs_tol=1e-8)


def test_closed_forms():
    t = np.linspace(0.0, 10.0, 101)
    for q in (1.0, 2.0, 3.0):
        assert np.allclose(quantile_transport(LAPLACE, density("cauchy", q), t), np.expm1(t / q))
    g = np.linspace(0.0, 6.0, 61)
    assert np.allclose(quantile_transport(GAUSS, LAPLACE, g), -np.log(2 * stats.norm.sf(g)))


def test_laws_are_normalised():
    from scipy import integrate
    for law in (GAUSS, LAPLACE, density("subexp", 0.5), density("cauchy", 2.0)):
        total, _ = integrate.quad(law.pdf, -np.inf, np.inf)
        assert math.isclose(total, 1.0, rel_tol=1e-7)
        assert math.isclose(float(law.survival(0.0)), 0.5, rel_tol=1e-12)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
@pytest.mark.parametrize("src", ["gaussian", "laplace"])
def test_subexp_derivative_bound(q, src):
    hb = h_bound_subexp(q, src)
    t = np.linspace(0.0, 25.0, 2001)
    assert np.all(transport_derivative(density(src), density("subexp", q), t) <= hb.h(t))


@pytest.mark.parametrize("q", [1.0, 2.0])
def test_cauchy_bound_submultiplicative(q):
    hb = h_bound_cauchy(q, "laplace")
    assert hb.C >= 1
    s, t = np.meshgrid(np.linspace(0, 5, 21), np.linspace(0, 5, 21))
    assert np.all(hb.h(s + t) <= hb.h(s) * hb.h(t) * (1 + 1e-12))


def test_envelope_constants_bracket_one():
    lo, hi = exp_envelope_constants(0.5)
    assert 0 < lo <= hi < 10


@settings(max_examples=200)
@given(st.floats(0.1, 4), st.floats(0.1, 4), st.floats(0, 40))
def test_h_inverse_round_trip(a, b, log_u):
    u = math.exp(log_u)
    t = H_ab_inverse(a, b, u)
    assert t >= 1
    assert math.isclose(H_ab_eval(a, b, t), u, rel_tol=1e-9, abs_tol=1e-300)
    if u >= math.exp(b):
        assert t >= H_ab_inverse_lower(a, b, u) * (1 - 1e-12)


def test_invert_increasing_cube():
    y = np.array([0.0, 1.0, 8.0, 1e6])
    assert np.allclose(invert_increasing(lambda x: x**3, y), np.cbrt(y))


def test_errors():
    with pytest.raises(OutOfSupport):
        quantile_transport(GAUSS, LAPLACE, np.inf)
    with pytest.raises(OutOfDomain):
        H_ab_eval(1, 1, 0.5)
    with pytest.raises(OutOfDomain):
        H_ab_inverse_lower(1, 1, 1.0)
    with pytest.raises(BadParameter):
        h_bound_subexp(1.5)
    with pytest.raises(BadParameter):
        density("nope")
