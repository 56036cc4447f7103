"""Monte Carlo dominance checks of concentration bounds.

A scenario draws ``N`` copies of a statistic, builds its empirical survival
and compares it with a bound on a log grid.  The DKW slack makes the check
sound at finite ``N``: with probability ``1 - delta`` the empirical survival
stays within the slack of the true one uniformly in ``t``.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np
from scipy import integrate

from .concentration import (
    ProbOp,
    bahr_esseen_bound,
    differentiable_bound,
    euclidean_norm_bound,
    hanson_wright_bound,
    hanson_wright_mean_bound,
    lipschitz_rescale,
    max_abs_bound,
    randomized_lipschitz_bound,
    sum_tail_bound,
    survival_from_samples,
    EmpiricalSurvival,
)
from .analytic import E1, E2
from .errors import BadParameter, ShapeMismatch, UnknownScenario
from .transport import DensitySpec, density, h_bound_subexp, quantile_transport, transport_derivative

DEFAULT_DELTA = 1e-3
DEFAULT_SAMPLES = 100_000
GRID_POINTS = 200
GRID_QUANTILES = (0.5, 0.9999)
BATCH = 25_000

# stream purposes, mixed into the seed so that substreams never overlap
_DOMINANCE, _MEDIANS, _SETUP = 0, 1, 2


# sampling ---------------------------------------------------------------------------

def dkw_slack(N: int, delta: float = DEFAULT_DELTA) -> float:
    if not (isinstance(N, (int, np.integer)) and N >= 1):
        raise BadParameter("sample count must be a positive integer")
    if not 0 < delta <= 1:
        raise BadParameter("confidence level must lie in (0, 1]")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * N))


def sample(dist, n: int, stream: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. draws from a law given as a :class:`DensitySpec` or a recipe string.

    Recipes: ``gaussian``, ``laplace``, ``exponential``, ``uniform``,
    ``subexp:q`` and ``cauchy:q``.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise BadParameter("sample size must be a positive integer")
    if isinstance(dist, DensitySpec):
        return dist.sample(stream, int(n))
    name, _, arg = str(dist).partition(":")
    key = name.strip().lower()
    if key == "exponential":
        return stream.exponential(1.0, n)
    if key == "uniform":
        return stream.random(n)
    try:
        return density(key, float(arg) if arg else None).sample(stream, int(n))
    except ValueError as exc:
        raise BadParameter(f"bad recipe {dist!r}") from exc


def substream(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    """Counter-derived generator: fixed by ``(seed, purpose, index)`` alone."""
    return np.random.default_rng([int(seed), purpose, index])


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CONCOP_THREADS", "1")))
    except ValueError:
        return 1


def draw_batched(draw: Callable[[np.random.Generator, int], np.ndarray], N: int, seed: int,
                 purpose: int = _DOMINANCE) -> np.ndarray:
    """Draw ``N`` statistics in fixed-size batches, merged by batch index."""
    sizes = [BATCH] * (N // BATCH) + ([N % BATCH] if N % BATCH else [])
    jobs = [(k, s) for k, s in enumerate(sizes)]

    def run(job):
        k, s = job
        return draw(substream(seed, purpose, k), s)

    workers = _threads()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    return np.concatenate(parts)


# dominance ----------------------------------------------------------------------------

@dataclass
class VerifyReport:
    scenario: str
    params: dict
    seed: int
    n_samples: int
    grid: list
    empirical: list
    bound: list
    slack: float
    violations: list
    max_gap: float
    passed: bool
    warning: str | None = None
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        if d["warning"] is None:
            del d["warning"]
        return _finite_json(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"


def _finite_json(obj):
    """Replace non-finite floats by the strings ``inf`` / ``-inf`` / ``nan``."""
    if isinstance(obj, dict):
        return {k: _finite_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_json(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def bound_values(bound, grid) -> np.ndarray:
    """Top of the bound at each grid point, capped at 1.

    ``bound`` is a :class:`ProbOp` or a plain vectorized function of ``t``.
    """
    grid = np.asarray(grid, dtype=float)
    if isinstance(bound, ProbOp):
        vals = bound.upper_value(grid)
    else:
        vals = np.asarray(bound(grid), dtype=float)
    return np.minimum(vals, 1.0)


def log_grid(emp: EmpiricalSurvival, points: int = GRID_POINTS,
             quantiles: tuple[float, float] = GRID_QUANTILES) -> np.ndarray:
    x = emp.sorted_samples
    lo, hi = np.quantile(x, quantiles)
    lo = max(float(lo), float(x[x > 0].min()) if np.any(x > 0) else 0.0)
    if not (lo > 0 and hi > lo):
        return np.empty(0)
    return np.geomspace(lo, hi, points)


def check_dominance(emp: EmpiricalSurvival, bound, slack: float, grid, scale: float = 1.0,
                    scenario: str = "", params: dict | None = None, seed: int = 0) -> VerifyReport:
    """Require ``P(X > t) <= scale * min(bound(t), 1) + slack`` at every grid point."""
    grid = np.asarray(grid, dtype=float)
    warning = None
    if grid.size == 0:
        warning = "empty grid: dominance holds vacuously"
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
        empirical = np.empty(0)
        values = np.empty(0)
    else:
        empirical = emp.survival(grid)
        values = scale * bound_values(bound, grid)
    gap = empirical - values
    bad = gap > slack
    violations = [{"t": float(t), "empirical": float(e), "bound": float(b)}
                  for t, e, b in zip(grid[bad], empirical[bad], values[bad])]
    return VerifyReport(
        scenario=scenario,
        params=dict(params or {}),
        seed=int(seed),
        n_samples=emp.n,
        grid=grid.tolist(),
        empirical=empirical.tolist(),
        bound=values.tolist(),
        slack=float(slack),
        violations=violations,
        max_gap=float(gap.max()) if gap.size else -math.inf,
        passed=not violations,
        warning=warning,
    )


# matrix helpers ------------------------------------------------------------------------

def vec(M) -> np.ndarray:
    """Column-stacking vectorization."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ShapeMismatch("vec needs a matrix")
    return M.reshape(-1, order="F")


def kron(B, A) -> np.ndarray:
    return np.kron(np.asarray(B, dtype=float), np.asarray(A, dtype=float))


def frobenius(M) -> float:
    return float(np.linalg.norm(np.asarray(M, dtype=float), "fro"))


def op_norm(M) -> float:
    return float(np.linalg.norm(np.asarray(M, dtype=float), 2))


def _shapes(B, A, X):
    B, A, X = (np.atleast_2d(np.asarray(m, dtype=float)) for m in (B, A, X))
    p, n = X.shape
    if A.shape != (p, p) or B.shape != (n, n):
        raise ShapeMismatch(f"need A {p}x{p} and B {n}x{n} for X {p}x{n}, got {A.shape} and {B.shape}")
    return B, A, X


def quad_form_trace(B, A, X) -> float:
    """``tr(B X^T A X)``."""
    B, A, X = _shapes(B, A, X)
    return float(np.trace(B @ X.T @ A @ X))


def quad_form_vec(B, A, X) -> float:
    """Same quantity through ``vec(X)^T (B^T kron A) vec(X)``."""
    B, A, X = _shapes(B, A, X)
    v = vec(X)
    return float(v @ kron(B.T, A) @ v)


# scenarios --------------------------------------------------------------------------

@dataclass(frozen=True)
class Built:
    draw: Callable[[np.random.Generator, int], np.ndarray]
    bound: Any
    info: dict = field(default_factory=dict)
    # extra deterministic checks: name -> list of failing points
    extra: Callable[[], dict] | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    defaults: dict
    build: Callable[[dict, int], Built]


def _sum3_exp(p: dict, seed: int) -> Built:
    n = int(p["n"])
    e = E1()

    def draw(rng, size):
        return rng.exponential(1.0, (size, n)).sum(axis=1)

    return Built(draw, sum_tail_bound([e] * n))


def _max_gauss(p: dict, seed: int) -> Built:
    n = int(p["n"])

    def draw(rng, size):
        return np.abs(rng.standard_normal((size, n))).max(axis=1)

    return Built(draw, max_abs_bound("E2", n))


def _rlip_square(p: dict, seed: int) -> Built:
    # copies of a 1-Lipschitz image of Z differ like 2 exp(-t^2/4); 2|Z| decays like 2 exp(-t^2/8)
    alpha = lipschitz_rescale(E2(), math.sqrt(2.0))
    beta = lipschitz_rescale(E2(), 2.0)

    def draw(rng, size):
        z = rng.standard_normal((2, size))
        return np.abs(z[0] ** 2 - z[1] ** 2)

    return Built(draw, randomized_lipschitz_bound(alpha, [beta]))


def _random_matrix(seed: int, dim: int, symmetric: bool) -> np.ndarray:
    G = substream(seed, _SETUP).standard_normal((dim, dim)) / math.sqrt(dim)
    return 0.5 * (G + G.T) if symmetric else G


def _quadratic(A):
    def values(X):
        return np.einsum("ni,ij,nj->n", X, A, X)

    return values


def _hw_gauss(p: dict, seed: int) -> Built:
    dim, N = int(p["p"]), int(p["samples"])
    A = _random_matrix(seed, dim, symmetric=True)
    form = _quadratic(A)
    Xm = substream(seed, _MEDIANS).standard_normal((N, dim))
    m = float(np.median(2.0 * np.linalg.norm(Xm @ A.T, axis=1)))
    m_tr = float(np.median(form(Xm)))

    def draw(rng, size):
        return np.abs(form(rng.standard_normal((size, dim))) - m_tr)

    info = {"median_grad": m, "median_form": m_tr, "op_norm": op_norm(A)}
    return Built(draw, hanson_wright_bound(E2(), m, op_norm(A), 1.0), info)


def _hw_mean(p: dict, seed: int) -> Built:
    dim = int(p["p"])
    A = _random_matrix(seed, dim, symmetric=True)
    form = _quadratic(A)
    mean = float(np.trace(A))

    def draw(rng, size):
        return np.abs(form(rng.standard_normal((size, dim))) - mean)

    bound = hanson_wright_mean_bound(E2(), frobenius(A), 1.0, op_norm(A), 1.0)
    return Built(draw, bound, {"mean": mean, "frobenius": frobenius(A), "op_norm": op_norm(A)})


def _multi_level(p: dict, seed: int) -> Built:
    dim, N = int(p["p"]), int(p["samples"])
    A = _random_matrix(seed, dim, symmetric=False)
    S = 0.5 * (A + A.T)
    form = _quadratic(A)
    Zm = substream(seed, _MEDIANS).standard_normal((N, dim))
    m1 = float(np.median(2.0 * np.linalg.norm(Zm @ S.T, axis=1)))
    m2 = 2.0 * op_norm(S)
    m_phi = float(np.median(form(Zm)))

    def draw(rng, size):
        return np.abs(form(rng.standard_normal((size, dim))) - m_phi)

    info = {"medians": [m1, m2], "median_form": m_phi}
    return Built(draw, differentiable_bound(E2(), [m1, m2], "Strong"), info)


def shifted_moment(q: float, tail_exponent: float) -> float:
    """``E (e + |X|)^q`` when ``P(|X| > t) = (1 + t)^-tail_exponent``."""
    if not tail_exponent > q:
        raise BadParameter("the moment is infinite unless the tail exponent exceeds q")
    a = tail_exponent

    def integrand(t):
        return q * (math.e + t) ** (q - 1.0) * (1.0 + t) ** (-a)

    val, _ = integrate.quad(integrand, 0.0, np.inf, limit=400, epsabs=0.0, epsrel=1e-12)
    return math.e ** q + val


def _norm_heavy(p: dict, seed: int) -> Built:
    q, n = float(p["q"]), int(p["n"])
    tail_exponent = q + 1.0
    law = density("cauchy", tail_exponent)
    Mq = shifted_moment(q, tail_exponent)
    nb = euclidean_norm_bound(q, Mq, n, float(p["theta"]))

    def draw(rng, size):
        x = np.abs(law.sample(rng, 2 * size * n)).reshape(2, size, n)
        return np.abs(np.linalg.norm(x[0], axis=1) - np.linalg.norm(x[1], axis=1))

    def display_check():
        probe = np.geomspace(nb.display_from, 1e6, 200)
        chain = nb.operator.upper_value(probe)
        disp = nb.display(probe)
        bad = chain > disp * (1 + 1e-9)
        return {"display_dominates_chain": [float(t) for t in probe[bad]]}

    info = {"Mq_prime": Mq, "tail_exponent": tail_exponent, **nb.constants}
    return Built(draw, nb.operator, info, display_check)


def _transport_subexp(p: dict, seed: int) -> Built:
    q = float(p["q"])
    src, tgt = density("gaussian"), density("subexp", q)
    hb = h_bound_subexp(q, "gaussian")

    def draw(rng, size):
        return np.abs(quantile_transport(src, tgt, src.sample(rng, size)))

    def two_sided(t):
        t = np.asarray(t, dtype=float)
        return np.where(t < 0, 1.0, 2.0 * tgt.tail(np.maximum(t, 0.0)))

    def h_check():
        probe = np.linspace(0.0, 20.0, 2001)
        bad = transport_derivative(src, tgt, probe) > hb.h(probe)
        return {"h_dominates_derivative": [float(t) for t in probe[bad]]}

    return Built(draw, two_sided, {"h0": hb.h0, "C": hb.C}, h_check)


def _bahr_esseen(p: dict, seed: int) -> Built:
    n, power = int(p["n"]), float(p["p"])
    if power != 2.0:
        raise BadParameter("the scenario's exact moment sum is available for p = 2 only")
    law = density("cauchy", 3.0)
    # |X| has survival (1 + t)^-3: E|X| = 1/2 and E X^2 = 1, so E|X - X'|^2 = 2
    pair_sum = 2.0 * n
    mean = 0.5 * n

    def draw(rng, size):
        x = law.sample(rng, size * n).reshape(size, n)
        return np.abs(np.abs(x).sum(axis=1) - mean)

    return Built(draw, bahr_esseen_bound(power, pair_sum), {"pair_moments": pair_sum, "mean": mean})


_COMMON = {"samples": DEFAULT_SAMPLES, "delta": DEFAULT_DELTA}

SCENARIOS: dict[str, Scenario] = {
    s.name: s for s in (
        Scenario("SUM3_EXP", {"n": 3}, _sum3_exp),
        Scenario("MAX_GAUSS", {"n": 10}, _max_gauss),
        Scenario("RLIP_SQUARE", {}, _rlip_square),
        Scenario("HW_GAUSS", {"p": 20}, _hw_gauss),
        Scenario("HW_MEAN", {"p": 20}, _hw_mean),
        Scenario("NORM_HEAVY", {"q": 5.0, "n": 50, "theta": 2.0}, _norm_heavy),
        Scenario("MULTI_LEVEL", {"p": 10}, _multi_level),
        Scenario("TRANSPORT_SUBEXP", {"q": 0.5}, _transport_subexp),
        Scenario("BAHR_ESSEEN", {"n": 20, "p": 2.0}, _bahr_esseen),
    )
}


def run_scenario(name: str, overrides: dict | None = None) -> VerifyReport:
    """Run a registered scenario.

    Recognized overrides: ``seed``, ``samples``, ``delta``, ``scale_bound``,
    ``grid`` (explicit points) and the scenario's own parameters.
    """
    key = str(name).upper()
    if key not in SCENARIOS:
        raise UnknownScenario(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}")
    sc = SCENARIOS[key]
    over = {k: v for k, v in (overrides or {}).items() if v is not None}
    seed = int(over.pop("seed", 0))
    scale = float(over.pop("scale_bound", 1.0))
    grid = over.pop("grid", None)
    unknown = set(over) - set(sc.defaults) - set(_COMMON)
    if unknown:
        raise BadParameter(f"{key} does not take {sorted(unknown)}")
    params = {**_COMMON, **sc.defaults, **over}
    N = int(params["samples"])
    if N < 1:
        raise BadParameter("sample count must be positive")
    built = sc.build(params, seed)
    stats = draw_batched(built.draw, N, seed)
    emp = survival_from_samples(stats)
    pts = log_grid(emp) if grid is None else np.asarray(grid, dtype=float)
    echo = {**params, "scale_bound": scale, **built.info}
    report = check_dominance(emp, built.bound, dkw_slack(N, float(params["delta"])), pts,
                             scale=scale, scenario=key, params=echo, seed=seed)
    if built.extra is not None:
        checks = built.extra()
        report.checks = checks
        for check, points in checks.items():
            report.violations.extend({"check": check, "t": t} for t in points)
        report.passed = not report.violations
    return report
