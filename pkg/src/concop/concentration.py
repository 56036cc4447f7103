"""Probabilistic operators, empirical survivals and concentration bound constructors.

Every constructor maps operator inputs to a :class:`ProbOp` whose underlying
operator is evaluated exactly (closed form where available, otherwise the
lazy pointwise engine).  Outputs are not capped at 1; use :func:`cap_at_one`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as cartesian
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy import special

from . import lazy
from .analytic import AnalyticSeed, E1, E2, exp_power, power_seed
from .errors import (
    BadParameter,
    CompositionNotMaximal,
    DegenerateDenominator,
    EmptyParallelSum,
    EmptySamples,
    NegativeDomain,
    NotAModulus,
    NotIntegrable,
    NotLogSubadditive,
    NotProbabilistic,
    ZeroPivot,
)
from .intervals import INF, IntervalR
from .monotone_graph import MonoCurve, Orientation, build_curve, check_maximal, domain, range_of
from .operator_algebra import (
    MAXIMAL,
    const,
    incr_pos,
    op_compose,
    op_invert,
    op_min,
    op_parallel_product,
    op_parallel_sum,
    op_restrict,
    op_scale_arg,
    op_scale_value,
    op_shift_arg,
)
from .operator_integral import alpha_zero, integral, moment
from .transport import H_ab_inverse, invert_increasing

M_P = "M_P"
M_P_PLUS = "M_P+"
_RANGE_TOL = 1e-12


# probabilistic operators ----------------------------------------------------------

@dataclass(frozen=True)
class ProbOp:
    """A nonincreasing operator with values in ``[0, inf)`` reaching up to 1."""

    op: Any
    klass: str
    label: str = ""
    trivial: bool = False

    orientation = Orientation.DOWN

    def images(self, x):
        return self.op.images(x)

    def images_up(self, x):
        return self.op.images_up(x)

    def __call__(self, t: float) -> IntervalR:
        return self.op(t)

    def domain(self) -> IntervalR:
        return _domain(self.op)

    def range(self) -> IntervalR:
        return _range(self.op)

    def is_maximal(self) -> bool:
        return True

    def inverse(self):
        return op_invert(self.op)

    def upper_value(self, t) -> np.ndarray:
        """Top of the image at ``t``; ``inf`` left of the domain, ``-inf`` right of it."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = self.op.images(t)
        D = self.domain()
        out = np.where(np.isnan(hi), np.where(t < D.lo, INF, -INF), hi)
        return out


def _raw(a):
    return a.op if isinstance(a, ProbOp) else a


def _domain(op) -> IntervalR:
    return domain(op) if isinstance(op, MonoCurve) else op.domain()


def _range(op) -> IntervalR:
    return range_of(op) if isinstance(op, MonoCurve) else op.range()


def _maximal(op) -> bool:
    return check_maximal(op) if isinstance(op, MonoCurve) else op.is_maximal()


def classify_prob_op(f, label: str = "") -> ProbOp:
    """Certify ``f`` as a (positive) probabilistic operator."""
    f = _raw(f)
    if f.orientation is not Orientation.DOWN:
        raise NotProbabilistic("probabilistic operators are nonincreasing")
    if isinstance(f, MonoCurve) and f.empty:
        raise NotProbabilistic("the empty operator is not probabilistic")
    if not _maximal(f):
        raise NotProbabilistic("probabilistic operators are maximal")
    R = _range(f)
    if R.lo < -_RANGE_TOL:
        raise NotProbabilistic(f"range leaves [0, inf): lowest value {R.lo}")
    if R.hi < 1.0 - _RANGE_TOL:
        raise NotProbabilistic(f"values never approach 1 from below: sup of range is {R.hi}")
    if R.lo > 1.0 + _RANGE_TOL:
        raise NotProbabilistic(f"no values below 1: range starts at {R.lo}")
    D = _domain(f)
    return ProbOp(f, M_P_PLUS if D.lo >= 0 else M_P, label or getattr(f, "name", ""))


def positive_part(p) -> ProbOp:
    """Restriction to ``[0, inf)``, which turns a probabilistic operator into a positive one."""
    p = p if isinstance(p, ProbOp) else classify_prob_op(p)
    if p.klass == M_P_PLUS:
        return p
    r = op_restrict(p.op, IntervalR.make(0.0, INF, True, False))
    return ProbOp(r, M_P_PLUS, p.label, p.trivial)


def _wrap(op, label: str, trivial: bool = False) -> ProbOp:
    D = _domain(op)
    return ProbOp(op, M_P_PLUS if D.lo >= 0 else M_P, label, trivial)


def _as_prob(a, positive: bool = False) -> ProbOp:
    p = a if isinstance(a, ProbOp) else classify_prob_op(a)
    if positive and p.klass != M_P_PLUS:
        raise NegativeDomain(f"{p.label or 'operator'} must live on [0, inf)")
    return p


def cap_at_one(p) -> ProbOp:
    p = _as_prob(p)
    return ProbOp(op_min([p.op, const(1.0)]), p.klass, f"min({p.label}, 1)", p.trivial)


# empirical survival ---------------------------------------------------------------

@dataclass(frozen=True)
class EmpiricalSurvival:
    """``t -> [P(X > t), P(X >= t)]`` for the empirical law of a sample."""

    sorted_samples: np.ndarray
    values: np.ndarray = field(repr=False)
    tail_gt: np.ndarray = field(repr=False)
    tail_ge: np.ndarray = field(repr=False)

    orientation = Orientation.DOWN

    @property
    def n(self) -> int:
        return int(self.sorted_samples.size)

    def survival(self, t) -> np.ndarray:
        """``P(X > t)``."""
        t = np.asarray(t, dtype=float)
        return (self.n - np.searchsorted(self.sorted_samples, t, side="right")) / self.n

    def survival_ge(self, t) -> np.ndarray:
        """``P(X >= t)``."""
        t = np.asarray(t, dtype=float)
        return (self.n - np.searchsorted(self.sorted_samples, t, side="left")) / self.n

    def images(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.survival(t), self.survival_ge(t)

    def __call__(self, t: float) -> IntervalR:
        lo, hi = self.images([t])
        return IntervalR.make(float(lo[0]), float(hi[0]))

    def domain(self) -> IntervalR:
        return IntervalR.real_line()

    def range(self) -> IntervalR:
        return IntervalR.make(0.0, 1.0)

    def is_maximal(self) -> bool:
        return True

    def to_curve(self) -> MonoCurve:
        verts = []
        for v, gt, ge in zip(self.values, self.tail_gt, self.tail_ge):
            verts += [(float(v), float(ge)), (float(v), float(gt))]
        return build_curve(Orientation.DOWN, verts, "horizontal", "horizontal")


def survival_from_samples(samples) -> EmpiricalSurvival:
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise EmptySamples("survival needs at least one sample")
    if not np.all(np.isfinite(x)):
        raise BadParameter("samples must be finite")
    values, counts = np.unique(x, return_counts=True)
    n = x.size
    after = n - np.cumsum(counts)
    return EmpiricalSurvival(x, values, after / n, (after + counts) / n)


class LawSurvival(lazy.LazyOp):
    """``t -> P(X > t)`` for a continuous law from the transport module."""

    orientation = Orientation.DOWN

    def __init__(self, law):
        self.law = law
        self.name = f"S[{law.name}]"

    def images_up(self, x):
        s = self.law.survival(np.atleast_1d(np.asarray(x, dtype=float)))
        return -s, -s

    def domain(self) -> IntervalR:
        return IntervalR.real_line()

    def range(self) -> IntervalR:
        return IntervalR.make(0.0, 1.0, False, False)


def law_survival(name: str, q: float | None = None) -> ProbOp:
    from .transport import density

    op = LawSurvival(density(name, q))
    return ProbOp(op, M_P, op.name)


# Taylor coefficients -------------------------------------------------------------

@dataclass(frozen=True)
class TaylorCoeffs:
    a: tuple[Fraction, ...]

    def __getitem__(self, i: int) -> Fraction:
        """1-based access: ``coeffs[1] == 1``."""
        if not 1 <= i <= len(self.a):
            raise IndexError(i)
        return self.a[i - 1]

    def as_floats(self) -> list[float]:
        return [float(v) for v in self.a]


def _poly_add(p: dict, q: dict) -> dict:
    out = {k: dict(v) for k, v in p.items()}
    for power, coeffs in q.items():
        slot = out.setdefault(power, {})
        for m, c in coeffs.items():
            slot[m] = slot.get(m, 0) + c
    return out


def taylor_poly_coeffs(d: int, medians: Sequence[float] | None = None) -> TaylorCoeffs:
    """Coefficients ``a_i`` with ``P_d = sum_i a_i m_i X^i``.

    The polynomials are expanded exactly with rational arithmetic, keeping the
    ``m_k`` as formal symbols: ``P_0 = 0`` and
    ``P_k = sum_{l=1..k} X^l / l! (P_{k-l} + m_{d-k+l})``.
    """
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise BadParameter("degree must be a positive integer")
    if medians is not None:
        if len(medians) != d or any(m < 0 for m in medians):
            raise BadParameter("need d non-negative medians")
    # polynomial: {power of X: {index of m: rational coefficient}}
    P: list[dict] = [{}]
    for k in range(1, d + 1):
        acc: dict = {}
        for l in range(1, k + 1):
            inner = _poly_add(P[k - l], {0: {d - k + l: Fraction(1)}})
            w = Fraction(1, math.factorial(l))
            shifted = {pw + l: {m: c * w for m, c in cs.items()} for pw, cs in inner.items()}
            acc = _poly_add(acc, shifted)
        P.append(acc)
    a = []
    for i in range(1, d + 1):
        coeffs = {m: c for m, c in P[d].get(i, {}).items() if c != 0}
        if set(coeffs) != {i}:
            raise BadParameter(f"coefficient of X^{i} is not proportional to m_{i}: {coeffs}")
        a.append(coeffs[i])
    return TaylorCoeffs(tuple(a))


# building blocks ------------------------------------------------------------------

def compose_power(alpha, scale: float, exponent: float):
    """``alpha o (id / scale)^exponent`` with the half-line power convention.

    ``scale == 0`` gives the positive step at 0.
    """
    alpha = _raw(alpha)
    if scale == 0:
        return incr_pos(0.0)
    if scale < 0 or exponent <= 0:
        raise BadParameter("need a non-negative scale and a positive exponent")
    if exponent == 1.0:
        return op_scale_arg(alpha, 1.0 / scale)
    meta = getattr(alpha, "meta", {})
    if isinstance(alpha, AnalyticSeed) and meta.get("family") == "exp_power" and alpha.lo == 0:
        K, c, p = meta["K"], meta["c"], meta["p"]
        return exp_power(K, c / scale ** (p * exponent), p * exponent)
    return lazy.Compose(alpha, op_scale_arg(power_seed(exponent), 1.0 / scale))


def _psum_all(ops: Sequence):
    out = ops[0]
    for op in ops[1:]:
        out = op_parallel_sum(out, op)
    return out


def _pprod_all(ops: Sequence):
    out = ops[0]
    for op in ops[1:]:
        out = op_parallel_product(out, op)
    return out


def _times(c: float, op):
    return op if c == 1 else op_scale_value(op, c)


def step_sum(alpha, delta: float):
    """``alpha (+) Incr_delta`` in closed form: ``min(alpha o (id - delta), 1)``."""
    return op_min([op_shift_arg(_raw(alpha), -delta), const(1.0)])


def step_product(alpha, delta: float):
    """``alpha (x) IncrPos_delta`` in closed form: ``min(alpha o (id / delta), 1)``."""
    if not delta > 0:
        raise BadParameter("the step must sit at a positive point")
    return op_min([op_scale_arg(_raw(alpha), 1.0 / delta), const(1.0)])


# sums and products ----------------------------------------------------------------

def sum_tail_bound(alphas: Sequence) -> ProbOp:
    """Survival of a sum of ``n`` variables: ``n`` times the parallel sum of their bounds."""
    ps = [_as_prob(a) for a in alphas]
    if not ps:
        raise BadParameter("need at least one operator")
    common = _range(ps[0].op)
    for p in ps[1:]:
        common = common.intersect(_range(p.op))
    if common.is_empty:
        raise EmptyParallelSum("ranges have no common value")
    n = len(ps)
    if n > 1 and all(p.op is ps[0].op for p in ps):
        # n equal summands: n alpha o (id / n)
        body = op_scale_arg(ps[0].op, 1.0 / n)
    else:
        body = _psum_all([p.op for p in ps])
    return _wrap(_times(n, body), f"{n}*psum({', '.join(p.label for p in ps)})")


def product_tail_bound(alphas: Sequence) -> ProbOp:
    ps = [_as_prob(a, positive=True) for a in alphas]
    if not ps:
        raise BadParameter("need at least one operator")
    n = len(ps)
    return _wrap(_times(n, _pprod_all([p.op for p in ps])), f"{n}*pprod({', '.join(p.label for p in ps)})")


def pivot_sum_bound(alpha, beta) -> ProbOp:
    a, b = _as_prob(alpha, True), _as_prob(beta, True)
    body = op_scale_arg(a.op, 0.5) if a.op is b.op else op_parallel_sum(a.op, b.op)
    return _wrap(_times(2.0, body), f"2*psum({a.label}, {b.label})")


def pivot_product_bound(alpha, beta, x_pivot: float, y_pivot: float) -> ProbOp:
    a, b = _as_prob(alpha, True), _as_prob(beta, True)
    if x_pivot == 0 or y_pivot == 0:
        raise ZeroPivot("pivots of a product bound must be non-zero")
    parts = [op_parallel_product(a.op, b.op),
             op_scale_arg(a.op, 1.0 / abs(y_pivot)),
             op_scale_arg(b.op, 1.0 / abs(x_pivot))]
    return _wrap(_times(4.0, _psum_all(parts)), f"4*pivot_product({a.label}, {b.label})")


# rescalings -----------------------------------------------------------------------

def lipschitz_rescale(alpha, sigma: float) -> ProbOp:
    a = _as_prob(alpha)
    if not sigma > 0 or not math.isfinite(sigma):
        raise BadParameter("Lipschitz constant must be positive and finite")
    return _wrap(op_scale_arg(a.op, 1.0 / sigma), f"{a.label} o (id/{sigma:g})")


PIVOT_TO_COPY = "PivotToCopy"
COPY_TO_MEDIAN = "CopyToMedian"


def median_from_copy_chain(alpha, stage: str) -> ProbOp:
    """One link of pivot -> independent copy -> median.

    ``PivotToCopy`` maps ``alpha`` to ``2 alpha o (id/2)``; ``CopyToMedian``
    doubles an operator already bounding the copy difference.
    """
    a = _as_prob(alpha, True)
    key = stage.replace("_", "").lower()
    if key == "pivottocopy":
        return _wrap(_times(2.0, op_scale_arg(a.op, 0.5)), f"2*{a.label} o (id/2)")
    if key == "copytomedian":
        return _wrap(_times(2.0, a.op), f"2*{a.label}")
    raise BadParameter(f"unknown stage {stage!r}")


def _mean_denominator(a: ProbOp, at: float) -> tuple[float, bool]:
    lo, hi = a.images(np.asarray([at]))
    lo, hi = float(lo[0]), float(hi[0])
    if math.isnan(lo):
        raise DegenerateDenominator(f"operator is undefined at {at}")
    if hi <= 0:
        return 0.0, True
    # the smallest positive value keeps the bound conservative; when the image
    # touches 0, the top value still works because alpha(t/2) >= max alpha(tau)
    # whenever t < 2 tau
    y = lo if lo > 0 else hi
    return min(1.0, y), False


def mean_pivot_bound(alpha) -> ProbOp:
    """Concentration around the mean from a pivot bound: ``alpha o (id/2) / min(1, alpha(int alpha))``."""
    a = _as_prob(alpha)
    total = integral(a.op, 0.0, INF)
    if not math.isfinite(total):
        raise NotIntegrable(f"integral of {a.label or 'the operator'} diverges")
    den, degenerate = _mean_denominator(a, total)
    if degenerate:
        return ProbOp(const(1.0), M_P, "1 (trivial)", trivial=True)
    return _wrap(_times(1.0 / den, op_scale_arg(a.op, 0.5)), f"{a.label} o (id/2) / {den:g}")


def mean_concentration_factor(alpha) -> ProbOp:
    return mean_pivot_bound(alpha)


def tail_from_pivot(alpha, delta: float) -> ProbOp:
    a = _as_prob(alpha, True)
    d = abs(float(delta))
    return _wrap(step_sum(a.op, d), f"min({a.label} o (id-{d:g}), 1)")


def modulus_bound(alpha, omega) -> ProbOp:
    """``alpha o omega^-1`` for a modulus of continuity ``omega``."""
    a = _as_prob(alpha, True)
    _check_modulus(omega)
    composed, verdict = op_compose(a.op, op_invert(omega))
    if verdict != MAXIMAL:
        raise CompositionNotMaximal(f"alpha o omega^-1 is {verdict}")
    return _wrap(composed, f"{a.label} o omega^-1")


def _check_modulus(omega) -> None:
    if omega.orientation is not Orientation.UP:
        raise NotAModulus("a modulus is nondecreasing")
    at0 = omega(0.0)
    if at0.is_empty or at0.lo != 0 or at0.hi != 0:
        raise NotAModulus(f"a modulus maps 0 to {{0}}, got {at0}")
    R = _range(omega)
    if not (R.lo == 0 and R.lo_closed and R.hi == INF):
        raise NotAModulus(f"a modulus has range [0, inf), got {R}")
    if not _maximal(omega):
        raise NotAModulus("a modulus is maximal")


def randomized_lipschitz_bound(alpha, betas: Sequence = ()) -> ProbOp:
    a = _as_prob(alpha, True)
    bs = [_as_prob(b, True) for b in betas]
    if not bs:
        return a
    n = len(bs)
    body = _pprod_all([a.op] + [b.op for b in bs])
    return _wrap(_times(2 * n + 1, body), f"{2 * n + 1}*pprod({a.label}, ...)")


def max_abs_bound(base: str, n: int) -> ProbOp:
    """Maximum of ``n`` absolute values with a Gaussian (E2) or exponential (E1) tail."""
    if not isinstance(n, (int, np.integer)) and not (isinstance(n, float) and n >= 1):
        raise BadParameter("count must be a number >= 1")
    if n < 1:
        raise BadParameter("count must be >= 1")
    key = base.upper()
    if key == "E2":
        seed, shift = E2(), math.sqrt(2.0 * math.log(n))
    elif key == "E1":
        seed, shift = E1(), math.log(n)
    else:
        raise BadParameter(f"unknown base {base!r}")
    return _wrap(step_sum(seed, shift), f"min({key} o (id-{shift:g}), 1)")


# multilevel -----------------------------------------------------------------------

def multilevel_bound(alpha, families: Sequence[dict]) -> ProbOp:
    """Parallel sum over index tuples of ``alpha o (id / prod sigma)^(1 / (1 + sum a))``.

    ``families[k]`` maps each level ``a`` (a finite set containing 0) to its
    scale ``sigma^(k)_a >= 0``.
    """
    a = _as_prob(alpha, True)
    fams = [dict(f) for f in families]
    for f in fams:
        if 0 not in f and 0.0 not in f:
            raise BadParameter("every level set must contain 0")
        if any(s < 0 for s in f.values()) or any(lv < 0 for lv in f):
            raise BadParameter("levels and scales must be non-negative")
    n = len(fams)
    terms = []
    for combo in cartesian(*[sorted(f.items()) for f in fams]):
        scale = math.prod(s for _, s in combo)
        if scale == 0:
            continue  # a zero scale gives the step at 0, neutral in the parallel sum
        expo = 1.0 / (1.0 + sum(lv for lv, _ in combo))
        terms.append(compose_power(a.op, scale, expo))
    body = _psum_all(terms) if terms else incr_pos(0.0)
    return _wrap(_times(2 * n + 1, body), f"{2 * n + 1}*multilevel({a.label})")


# differentiable maps ---------------------------------------------------------------

def _power_psum(scales: Sequence[tuple[int, float]]):
    """``(+)_k (id / c_k)^(1/k)`` for the pairs ``(k, c_k)`` with ``c_k > 0``."""
    parts = []
    for k, c in scales:
        inner = power_seed(1.0 / k) if k != 1 else _linear()
        parts.append(op_scale_arg(inner, 1.0 / c))
    return _psum_all(parts)


def _linear():
    # the half-line identity with id(0) = (-inf, 0], matching the power convention
    return build_curve(Orientation.UP, [(0.0, 0.0)], "vertical", 1.0)


STRONG = "Strong"
WEAK = "Weak"


def differentiable_bound(alpha, medians: Sequence[float], form: str = STRONG) -> ProbOp:
    a = _as_prob(alpha, True)
    m = [float(v) for v in medians]
    d = len(m)
    if d < 1 or any(v < 0 for v in m) or not m[-1] > 0:
        raise BadParameter("need non-negative medians with a positive last one")
    key = form.lower()
    if key == "strong":
        coeffs = taylor_poly_coeffs(d).as_floats()
        scales = [(k, coeffs[k - 1] * m[k - 1]) for k in range(1, d + 1) if m[k - 1] > 0]
        inner = _power_psum(scales)
        factor = 2.0 ** (d - 1)
    elif key == "weak":
        parts = []
        for k in range(1, d + 1):
            if m[k - 1] == 0:
                continue
            base = power_seed(1.0 / k) if k != 1 else _linear()
            parts.append(op_scale_arg(base, 1.0 / (d * m[k - 1])))
        inner = op_scale_value(op_min(parts), 1.0 / math.e)
        factor = 2.0 ** d
    else:
        raise BadParameter(f"unknown form {form!r}")
    composed = lazy.Compose(a.op, inner)
    return _wrap(_times(factor, composed), f"{factor:g}*{a.label} o ({form.lower()} inner)")


def hanson_wright_bound(alpha, m: float, normA: float, normB: float) -> ProbOp:
    if m < 0 or not (normA > 0 and normB > 0):
        raise BadParameter("need m >= 0 and positive norms")
    if m == 0:
        # only the square-root regime survives
        a = _as_prob(alpha, True)
        inner = op_scale_arg(power_seed(0.5), 1.0 / (3.0 * normA * normB))
        return _wrap(_times(2.0, lazy.Compose(a.op, inner)), f"2*{a.label} o sqrt(id/{3 * normA * normB:g})")
    return differentiable_bound(alpha, [m, 2.0 * normA * normB], STRONG)


def hanson_wright_mean_bound(alpha, frobA: float, frobB: float, normA: float, normB: float) -> ProbOp:
    a = _as_prob(alpha, True)
    if min(frobA, frobB, normA, normB) <= 0:
        raise BadParameter("norms must be positive")
    M2 = moment(a.op, 2.0)
    if not math.isfinite(M2):
        raise NotIntegrable("second moment diverges")
    lo, _ = a.images(np.asarray([math.sqrt(M2)]))
    den = float(lo[0])
    if not den > 0:
        raise DegenerateDenominator("alpha vanishes at the square root of its second moment")
    sigma = 10.0 * math.sqrt(M2 / den)
    lin = op_scale_arg(_linear(), 1.0 / (sigma * frobA * frobB))
    root = op_scale_arg(power_seed(0.5), 1.0 / (6.0 * normA * normB))
    inner = op_min([lin, root])
    body = _times(2.0 / den, lazy.Compose(a.op, inner))
    op = _wrap(body, f"hanson_wright_mean({a.label})")
    return op


def hw_mean_scale(alpha) -> float:
    """``10 sqrt(M2 / min alpha(sqrt M2))``."""
    a = _as_prob(alpha, True)
    M2 = moment(a.op, 2.0)
    lo, _ = a.images(np.asarray([math.sqrt(M2)]))
    return 10.0 * math.sqrt(M2 / float(lo[0]))


# moment-type bounds ---------------------------------------------------------------

def bahr_esseen_bound(p: float, pair_moments: float) -> ProbOp:
    """``t -> min(1, 2 S / t^p)``."""
    if not 1.0 <= p <= 2.0:
        raise BadParameter("exponent must lie in [1, 2]")
    if pair_moments < 0:
        raise BadParameter("moment sum must be non-negative")
    if pair_moments == 0:
        return ProbOp(incr_pos(0.0), M_P_PLUS, "IncrPos_0")
    decay = op_scale_value(power_seed(-p), 2.0 * pair_moments)
    body = op_min([decay, const(1.0)])
    return _wrap(op_restrict(body, IntervalR.make(0.0, INF, True, False)),
                 f"min(1, {2 * pair_moments:g}/t^{p:g})")


def moment_matrix_bound(alpha, d: int) -> float:
    a = _as_prob(alpha)
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise BadParameter("order must be a positive integer")
    M = moment(a.op, float(d))
    if not math.isfinite(M):
        raise NotIntegrable(f"moment of order {d} diverges")
    return M


# transport-driven bounds ------------------------------------------------------------

def _times_h_inverse(h: Callable, factor: float, name: str) -> AnalyticSeed:
    """Inverse of ``t -> factor * t * h(t)`` on ``[0, inf)`` as a nondecreasing seed."""

    def forward(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):
            return factor * t * np.asarray(h(t), dtype=float)

    def inverse_fn(y):
        y = np.asarray(y, dtype=float)
        flat = np.atleast_1d(y)
        out = invert_increasing(forward, np.maximum(flat, 0.0))
        out = np.where(flat <= 0, 0.0, out)
        return out.reshape(y.shape) if y.ndim else out[0]

    return AnalyticSeed(Orientation.UP, inverse_fn, forward, 0.0, INF, "vertical", "open",
                        None, None, name, 0.0, INF)


def _check_positive_increasing(h: Callable) -> None:
    grid = np.concatenate([[0.0], np.geomspace(1e-6, 1e3, 400)])
    vals = np.asarray(h(grid), dtype=float)
    if np.any(~(vals > 0)):
        raise BadParameter("transport bound h must be positive")
    if np.any(np.diff(vals) < -1e-12 * np.abs(vals[1:])):
        raise BadParameter("transport bound h must be nondecreasing")


def gaussian_transport_bound(h: Callable, n: int, theta: float) -> ProbOp:
    """``3 E2 o min((sqrt2/theta id.h)^-1, (id/sqrt2) / h(sqrt(2 log n)/(1-theta)))``."""
    if not 0 < theta < 1:
        raise BadParameter("theta must lie in (0, 1)")
    if n < 1:
        raise BadParameter("dimension must be >= 1")
    _check_positive_increasing(h)
    first = _times_h_inverse(h, math.sqrt(2.0) / theta, "(sqrt2/theta id.h)^-1")
    level = float(np.asarray(h(np.asarray([math.sqrt(2.0 * math.log(n)) / (1.0 - theta)])))[0])
    second = op_scale_arg(_linear(), 1.0 / (math.sqrt(2.0) * level))
    inner = op_min([first, second])
    return _wrap(_times(3.0, lazy.Compose(E2(), inner)), "3*E2 o gaussian transport")


def check_submultiplicative(h: Callable, grid=None) -> tuple[float, float] | None:
    """First pair ``(x, y)`` on the grid with ``h(x) h(y) < h(x + y)``, else ``None``."""
    if grid is None:
        grid = np.concatenate([[0.0], np.geomspace(1e-3, 50.0, 120)])
    g = np.asarray(grid, dtype=float)
    X, Y = np.meshgrid(g, g)
    hx, hy = np.asarray(h(X), dtype=float), np.asarray(h(Y), dtype=float)
    hs = np.asarray(h(X + Y), dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        bad = hx * hy < hs * (1 - 1e-12)
    if not bad.any():
        return None
    i, j = np.argwhere(bad)[0]
    return float(X[i, j]), float(Y[i, j])


def laplace_transport_bound(h: Callable, n: int) -> ProbOp:
    """``3 E1 o (id.h)^-1 o (id / (8 sqrt3 h(log n)))``."""
    if n < 1:
        raise BadParameter("dimension must be >= 1")
    _check_positive_increasing(h)
    witness = check_submultiplicative(h)
    if witness is not None:
        raise NotLogSubadditive(f"h(x)h(y) < h(x+y) at {witness}", witness)
    level = float(np.asarray(h(np.asarray([math.log(n)])))[0])
    inner = op_scale_arg(_times_h_inverse(h, 1.0, "(id.h)^-1"), 1.0 / (8.0 * math.sqrt(3.0) * level))
    return _wrap(_times(3.0, lazy.Compose(E1(), inner)), "3*E1 o laplace transport")


def _log_ratio_decay(q: float, scale: float) -> AnalyticSeed:
    """``u -> 3 (q log(u/s) / (u/s))^q`` beyond the point where it falls to 1."""
    # y = 3 (q L / t)^q with L = log t; on t > e this is decreasing and
    # log t / t = c is solved by t = exp(-W_{-1}(-c))
    def tail_point(y):
        y = np.asarray(y, dtype=float)
        c = np.power(y / 3.0, 1.0 / q) / q
        w = special.lambertw(-c, -1).real
        return np.exp(-w)

    t_star = float(tail_point(np.asarray(1.0)))

    def fn(u):
        t = np.asarray(u, dtype=float) / scale
        with np.errstate(divide="ignore", invalid="ignore"):
            return 3.0 * np.power(q * np.log(t) / t, q)

    def inv(y):
        return scale * tail_point(y)

    return AnalyticSeed(Orientation.DOWN, fn, inv, scale * t_star, INF, "vertical", "open",
                        None, None, f"3(q log t/t)^q", 1.0, 0.0)


def moment_transport_bound(q: float, Mq: float, n: int) -> ProbOp:
    """Tail ``3 (q log t / t)^q`` at scale ``(Mq n)^{1/q} / (8 sqrt3)``, capped at 1 below."""
    if not (q > 0 and Mq > 0 and n >= 1):
        raise BadParameter("need q, Mq > 0 and n >= 1")
    scale = (Mq * n) ** (1.0 / q) / (8.0 * math.sqrt(3.0))
    decay = _log_ratio_decay(q, scale)
    body = op_restrict(op_min([decay, const(1.0)]), IntervalR.make(0.0, INF, True, False))
    return _wrap(body, f"min(1, 3(q log t/t)^q) at scale {scale:g}")


def moment_transport_scale(q: float, Mq: float, n: int) -> float:
    return (Mq * n) ** (1.0 / q) / (8.0 * math.sqrt(3.0))


def naive_sup_bound(q: float, Mq_prime: float, n: int, theta: float = 2.0) -> AnalyticSeed:
    """``t -> n Mq' / H^{-1}_{(theta+1)/theta, 1}(t / theta)^q`` on ``[0, inf)``."""
    a = (theta + 1.0) / theta
    top = n * Mq_prime

    def fn(t):
        t = np.asarray(t, dtype=float)
        return top / np.power(H_ab_inverse(a, 1.0, np.maximum(t, 0.0) / theta), q)

    def inv(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            base = np.maximum(np.power(top / y, 1.0 / q), 1.0)
        return theta * np.power(np.log(base), a) * base

    return AnalyticSeed(Orientation.DOWN, fn, inv, 0.0, INF, "vertical", "open", None, None,
                        "alpha_theta", top, 0.0)


@dataclass(frozen=True)
class NormBound:
    operator: ProbOp
    display: Callable[[np.ndarray], np.ndarray]
    display_from: float
    constants: dict


def euclidean_norm_bound(q: float, Mq_prime: float, n: int, theta: float = 2.0) -> NormBound:
    """Norm of a heavy-tailed vector: exact chain ``3 (E2 o id/2) (x) alpha_theta`` and its display.

    The display ``3 n Mq' (q^2 log^2(t/2) / (t/2))^q`` holds for ``t >= 2 e^{1/q}``:
    the inverse of the chain at level ``u`` is ``2 E2^-1(u/3) alpha^-1(u/3)``,
    which is at most ``2 H_{2,1/q}(3 n Mq'/u)`` when ``q >= 4`` and ``theta = 2``.
    """
    if q < 4:
        raise BadParameter("the norm bound needs q >= 4")
    if n * Mq_prime < 2:
        raise BadParameter("the norm bound needs n Mq' >= 2")
    if not theta > 0:
        raise BadParameter("theta must be positive")
    alpha = naive_sup_bound(q, Mq_prime, n, theta)
    base = op_scale_arg(E2(), 0.5)
    chain = _times(3.0, op_parallel_product(base, alpha))
    op = _wrap(chain, "3*(E2 o id/2) pprod alpha_theta")
    C, c = 3.0 * n * Mq_prime, 0.5

    def display(t):
        t = np.asarray(t, dtype=float)
        ct = c * t
        with np.errstate(divide="ignore", invalid="ignore"):
            return C * np.power(q * q * np.log(ct) ** 2 / ct, q)

    return NormBound(op, display, math.exp(1.0 / q) / c, {"C_prime": C, "c": c, "theta": theta})
