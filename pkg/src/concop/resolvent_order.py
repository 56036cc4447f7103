"""Pointwise resolvent order between monotone operators, and interval order."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import BadParameter, EmptyInterval, NotMaximal, OrientationMismatch
from .intervals import INF, IntervalR
from .monotone_graph import MonoCurve, Orientation, check_maximal, domain, resolvent_function

TOL = 1e-9
MODES = ("resolvent", "intermediate", "strong", "weak")


@dataclass(frozen=True)
class OrderVerdict:
    leq: bool
    witness: float | None = None
    tight: bool = False
    envelope_limited: bool = False

    def __bool__(self) -> bool:
        return self.leq


# intervals --------------------------------------------------------------------

def interval_leq(I: IntervalR, J: IntervalR) -> bool:
    """``I <= J`` iff ``J`` lies in the upper set of ``I`` and ``I`` in the lower set of ``J``."""
    if I.is_empty or J.is_empty:
        raise EmptyInterval("interval order needs non-empty intervals")
    return I.lo <= J.lo and I.hi <= J.hi


def _pick(intervals: Iterable[IntervalR], lower: bool) -> IntervalR:
    items = [I for I in intervals if not I.is_empty]
    if not items:
        return IntervalR.empty()
    sel = min if lower else max
    lo_src = sel(items, key=lambda I: (I.lo, (not I.lo_closed) != lower))
    hi_src = sel(items, key=lambda I: (I.hi, I.hi_closed != lower))
    return IntervalR.make(lo_src.lo, hi_src.hi, lo_src.lo_closed, hi_src.hi_closed)


def interval_min(family: Iterable[IntervalR]) -> IntervalR:
    """Greatest lower bound in interval order; empty members are ignored."""
    return _pick(family, lower=True)


def interval_max(family: Iterable[IntervalR]) -> IntervalR:
    return _pick(family, lower=False)


# operators --------------------------------------------------------------------

def _close_le(a: float, b: float) -> tuple[bool, bool]:
    """``(a <= b within TOL, nearly equal)``."""
    if a == b:
        return True, True
    if math.isinf(a) or math.isinf(b):
        return a <= b, False
    slack = TOL * max(1.0, abs(a), abs(b))
    return a <= b + slack, abs(a - b) <= slack


def _leq_resolvent(f: MonoCurve, g: MonoCurve) -> OrderVerdict:
    Jf, Jg = resolvent_function(f), resolvent_function(g)
    # nondecreasing: f <= g iff J_g <= J_f; nonincreasing: J_f <= J_g
    lo_fn, hi_fn = (Jg, Jf) if f.orientation is Orientation.UP else (Jf, Jg)
    knots = np.unique(np.concatenate([Jf.knots, Jg.knots]))
    a, b = lo_fn(knots), hi_fn(knots)
    tight = False
    for u, x, y in zip(knots, a, b):
        ok, eq = _close_le(x, y)
        tight |= eq
        if not ok:
            return OrderVerdict(False, float(u))
    if not _close_le(hi_fn.left_slope, lo_fn.left_slope)[0]:
        return OrderVerdict(False, float(knots[0] - 1.0 - abs(knots[0])))
    if not _close_le(lo_fn.right_slope, hi_fn.right_slope)[0]:
        return OrderVerdict(False, float(knots[-1] + 1.0 + abs(knots[-1])))
    return OrderVerdict(True, None, bool(tight))


def _domain_ok(f: MonoCurve, g: MonoCurve) -> bool:
    df, dg = domain(f), domain(g)
    if f.orientation is Orientation.UP:
        return interval_leq(dg, df)
    return interval_leq(df, dg)


def _mode_pred(mode: str, flo, fhi, glo, ghi):
    if mode == "intermediate":
        return [(flo, glo)]
    if mode == "strong":
        return [(flo, glo), (fhi, ghi)]
    return [(flo, ghi)]


def _leq_pointwise(f: MonoCurve, g: MonoCurve, mode: str) -> OrderVerdict:
    if not _domain_ok(f, g):
        d = domain(f)
        return OrderVerdict(False, float(d.lo if math.isfinite(d.lo) else d.hi))
    D = domain(f).intersect(domain(g))
    if D.is_empty:
        return OrderVerdict(True)
    xs = np.unique(np.concatenate([np.asarray(f.xs), np.asarray(g.xs),
                                   np.asarray([v for v in (D.lo, D.hi) if math.isfinite(v)])]))
    xs = xs[(xs >= D.lo) & (xs <= D.hi)]
    if D.lo == -INF:
        xs = np.concatenate([[xs[0] - 1.0 - abs(xs[0])], xs])
    if D.hi == INF:
        xs = np.concatenate([xs, [xs[-1] + 1.0 + abs(xs[-1])]])
    flo, fhi = f.images(xs)
    glo, ghi = g.images(xs)
    tight = False
    for k, x in enumerate(xs):
        for a, b in _mode_pred(mode, flo[k], fhi[k], glo[k], ghi[k]):
            ok, eq = _close_le(a, b)
            tight |= eq
            if not ok:
                return OrderVerdict(False, float(x))
    # inside a segment both operators are single-valued and linear, so the
    # comparison reduces to one-sided limits at the candidates
    f_ul, f_uh = f.images_up(xs)
    g_ul, g_uh = g.images_up(xs)
    s = f.orientation.sign
    right_f, left_f = s * f_uh[:-1], s * f_ul[1:]
    right_g, left_g = s * g_uh[:-1], s * g_ul[1:]
    for k in range(len(xs) - 1):
        for a, b in ((right_f[k], right_g[k]), (left_f[k], left_g[k])):
            ok, eq = _close_le(a, b)
            if not ok:
                return OrderVerdict(False, float(0.5 * (xs[k] + xs[k + 1])))
    # rays beyond the probes continue linearly: compare outward slopes
    if D.lo == -INF and len(xs) > 1:
        sf = s * (f_ul[1] - f_uh[0]) / (xs[1] - xs[0])
        sg = s * (g_ul[1] - g_uh[0]) / (xs[1] - xs[0])
        if not _close_le(sg, sf)[0]:
            return OrderVerdict(False, float(xs[0] - 1.0 - abs(xs[0])))
    if D.hi == INF and len(xs) > 1:
        sf = s * (f_ul[-1] - f_uh[-2]) / (xs[-1] - xs[-2])
        sg = s * (g_ul[-1] - g_uh[-2]) / (xs[-1] - xs[-2])
        if not _close_le(sf, sg)[0]:
            return OrderVerdict(False, float(xs[-1] + 1.0 + abs(xs[-1])))
    return OrderVerdict(True, None, bool(tight))


def op_leq(f, g, mode: str = "resolvent", eps: float = 1e-9, window=None) -> OrderVerdict:
    """Decide ``f <= g`` in the pointwise resolvent order.

    ``mode`` selects one of four equivalent tests: comparison of resolvents,
    or the intermediate / strong / weak pointwise interval conditions.
    Closed-form operands are replaced by envelopes in the conservative
    direction, so a ``False`` there may only mean the envelopes overlap.
    """
    mode = mode.lower()
    if mode not in MODES:
        raise BadParameter(f"unknown order mode {mode!r}")
    if f.orientation is not g.orientation:
        raise OrientationMismatch("order is defined within one orientation")
    limited = False
    if not isinstance(f, MonoCurve) or not isinstance(g, MonoCurve):
        f, g = _envelope_pair(f, g, eps, window)
        limited = True
    for op in (f, g):
        if not check_maximal(op):
            raise NotMaximal("order comparison needs maximal operators")
    v = _leq_resolvent(f, g) if mode == "resolvent" else _leq_pointwise(f, g, mode)
    if limited:
        return OrderVerdict(v.leq, v.witness, v.tight, envelope_limited=not v.leq)
    return v


def _envelope_pair(f, g, eps, window):
    """Upper envelope of ``f`` and lower envelope of ``g`` on a shared window.

    Envelopes of decaying tails cannot be compared beyond a finite window
    (the upper one keeps a positive residual), so both are restricted to it.
    """
    from .analytic import _tail_point, envelope_of_analytic
    from .monotone_graph import restrict_to

    if window is None:
        lo, hi = [], []
        for op in (f, g):
            if isinstance(op, MonoCurve):
                continue
            lo.append(op.lo if math.isfinite(op.lo) else _tail_point(op, "lo", 1e-12))
            hi.append(op.hi if math.isfinite(op.hi) else _tail_point(op, "hi", 1e-12))
        window = (min(lo), max(hi))
    W = IntervalR.make(window[0], window[1])
    if not isinstance(f, MonoCurve):
        f = envelope_of_analytic(f, "upper", eps, window)
    if not isinstance(g, MonoCurve):
        g = envelope_of_analytic(g, "lower", eps, window)
    return restrict_to(f, W), restrict_to(g, W)


def leq_on_grid(f, g, grid) -> OrderVerdict:
    """Probe the strong condition ``f(y) <= g(y)`` on a grid (not a certificate)."""
    grid = np.asarray(grid, dtype=float)
    flo, fhi = f.images(grid)
    glo, ghi = g.images(grid)
    both = ~np.isnan(flo) & ~np.isnan(glo)
    for x, a, b, c, d in zip(grid[both], flo[both], fhi[both], glo[both], ghi[both]):
        if not (_close_le(a, c)[0] and _close_le(b, d)[0]):
            return OrderVerdict(False, float(x))
    return OrderVerdict(True)


def survival_leq(S, alpha) -> OrderVerdict:
    """Sufficient test for ``S <= alpha`` where ``S`` is a survival operator.

    At every point of the domain of ``alpha`` the survival value ``P(X > t)``
    must not exceed the top of ``alpha(t)``.  Checked at the breakpoints of
    both operators and at the left limits just before each breakpoint, which
    covers the piecewise-constant survival exactly.
    """
    if hasattr(S, "to_curve"):
        S = S.to_curve()
    if not isinstance(alpha, MonoCurve):
        from .analytic import envelope_of_analytic

        alpha = envelope_of_analytic(alpha, "lower", 1e-9)
    if not check_maximal(alpha):
        raise NotMaximal("the bound must be maximal")
    if S.orientation is not Orientation.DOWN or alpha.orientation is not Orientation.DOWN:
        raise OrientationMismatch("survival comparisons use nonincreasing operators")
    dA = domain(alpha)
    xs = np.unique(np.concatenate([np.asarray(S.xs), np.asarray(alpha.xs)]))
    if math.isfinite(dA.lo):
        xs = np.concatenate([[dA.lo], xs])
    xs = np.unique(xs)
    xs = xs[(xs >= dA.lo) & (xs <= dA.hi)]
    if xs.size == 0:
        return OrderVerdict(True)
    s_lo, _ = S.images(xs)
    _, a_hi = alpha.images(xs)
    bad = s_lo > a_hi + TOL * np.maximum(1.0, np.abs(a_hi))
    if bad.any():
        return OrderVerdict(False, float(xs[np.argmax(bad)]))
    # on (x_k, x_{k+1}) the survival equals its value just right of x_k and
    # alpha is at least its left limit at x_{k+1}
    if xs.size > 1:
        s_right = S.images_up(xs[:-1])[1] * -1.0
        a_left = alpha.images_up(xs[1:])[0] * -1.0
        bad = s_right > a_left + TOL * np.maximum(1.0, np.abs(a_left))
        if bad.any():
            k = int(np.argmax(bad))
            return OrderVerdict(False, float(0.5 * (xs[k] + xs[k + 1])))
    last_s = -S.images_up(xs[-1:])[1][0]
    rr = alpha.right_ray
    if dA.hi == INF and rr is not None and rr[1] > 0 and last_s > 0:
        return OrderVerdict(False, float(xs[-1] + 1.0 + abs(xs[-1])))
    return OrderVerdict(True)
