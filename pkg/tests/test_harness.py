import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from concop.analytic import E1
from concop.concentration import sum_tail_bound, survival_from_samples
from concop.errors import BadParameter, ShapeMismatch, UnknownScenario
from concop.harness import (
    SCENARIOS,
    check_dominance,
    dkw_slack,
    draw_batched,
    frobenius,
    kron,
    op_norm,
    quad_form_trace,
    quad_form_vec,
    run_scenario,
    sample,
    substream,
    vec,
)


def test_dkw_slack_value():
    assert math.isclose(dkw_slack(100_000, 1e-3), 0.0061648, rel_tol=1e-4)
    assert dkw_slack(1, 1.0) == math.sqrt(math.log(2) / 2)
    for N, d in ((0, 0.1), (10, 0.0), (10, 1.5), (2.5, 0.1)):
        with pytest.raises(BadParameter):
            dkw_slack(N, d)


def test_substreams_repeat_and_differ():
    a = substream(7, 0, 3).random(5)
    assert np.array_equal(a, substream(7, 0, 3).random(5))
    assert not np.array_equal(a, substream(7, 1, 3).random(5))
    assert not np.array_equal(a, substream(8, 0, 3).random(5))


def test_batches_ignore_thread_count(monkeypatch):
    draw = lambda rng, n: rng.standard_normal(n)  # noqa: E731
    monkeypatch.setenv("CONCOP_THREADS", "1")
    one = draw_batched(draw, 60_001, seed=3)
    monkeypatch.setenv("CONCOP_THREADS", "4")
    four = draw_batched(draw, 60_001, seed=3)
    assert one.shape == (60_001,) and np.array_equal(one, four)


def test_laplace_sample_mean():
    N = 200_000
    x = sample("laplace", N, substream(0, 2))
    # variance 2, so the mean is within 5 standard errors
    assert abs(x.mean()) < 5 * math.sqrt(2 / N)
    assert math.isclose(x.var(), 2.0, rel_tol=0.03)


def test_sample_recipes():
    rng = substream(1, 2)
    assert sample("uniform", 10, rng).max() < 1
    assert sample("exponential", 10, rng).min() >= 0
    assert sample("cauchy:2", 10, rng).shape == (10,)
    with pytest.raises(BadParameter):
        sample("cauchy:x", 10, rng)
    with pytest.raises(BadParameter):
        sample("uniform", 0, rng)


matrices = st.integers(1, 5).flatmap(
    lambda p: st.tuples(st.integers(1, 5), st.just(p), st.integers(0, 2**32 - 1)))


@settings(max_examples=200)
@given(matrices)
def test_quadratic_form_two_routes(args):
    n, p, seed = args
    rng = np.random.default_rng(seed)
    A, B, X = rng.standard_normal((p, p)), rng.standard_normal((n, n)), rng.standard_normal((p, n))
    a, b = quad_form_trace(B, A, X), quad_form_vec(B, A, X)
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))
    assert math.isclose(frobenius(kron(B, A)), frobenius(B) * frobenius(A), rel_tol=1e-12)
    assert math.isclose(op_norm(kron(B, A)), op_norm(B) * op_norm(A), rel_tol=1e-9)
    assert np.array_equal(vec(X), X.flatten(order="F"))


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        quad_form_trace(np.eye(2), np.eye(3), np.ones((2, 2)))


def test_empty_grid_is_vacuous():
    emp = survival_from_samples([1.0, 2.0])
    with pytest.warns(RuntimeWarning):
        rep = check_dominance(emp, sum_tail_bound([E1()]), 0.01, [])
    assert rep.passed and rep.warning


def test_violation_reported():
    emp = survival_from_samples(np.full(100, 5.0))
    rep = check_dominance(emp, sum_tail_bound([E1()]), 0.01, [0.001, 4.0])
    assert not rep.passed and [v["t"] for v in rep.violations] == [4.0]


def test_report_json_shape():
    rep = run_scenario("SUM3_EXP", {"seed": 1, "samples": 5000})
    d = json.loads(rep.to_json())
    for key in ("scenario", "params", "seed", "n_samples", "grid", "empirical", "bound",
                "slack", "violations", "max_gap", "pass"):
        assert key in d
    assert d["pass"] is True and len(d["grid"]) == 200


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_every_scenario_passes_and_falsifier_fails(name):
    base = {"seed": 11, "samples": 40_000}
    assert run_scenario(name, base).passed
    assert not run_scenario(name, {**base, "scale_bound": 0.1}).passed


def test_bad_requests():
    with pytest.raises(UnknownScenario):
        run_scenario("NOPE")
    with pytest.raises(BadParameter):
        run_scenario("SUM3_EXP", {"theta": 2})
    with pytest.raises(BadParameter):
        run_scenario("BAHR_ESSEEN", {"p": 3})
