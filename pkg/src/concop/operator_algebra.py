"""Operations on monotone operators.

When every operand is a :class:`MonoCurve` the exact piecewise-linear kernel
runs; otherwise the call returns a lazy expression from :mod:`concop.lazy`
that evaluates the same operation pointwise.  Use
:func:`concop.analytic.envelope_of_analytic` first to push closed-form
operators through the kernel.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import lazy
from .analytic import E1, E2, AnalyticSeed, power_seed
from .errors import BadParameter, NegativeDomain, NegativeRange, NotMaximal, OrientationMismatch
from .intervals import INF, IntervalR
from .monotone_graph import (
    HORIZONTAL,
    VERTICAL,
    MonoCurve,
    Orientation,
    _from_up,
    build_curve,
    check_maximal,
    domain,
    empty_curve,
    from_resolvent,
    invert,
    pointwise_extremum,
    range_of,
    ray_from_slope,
    resolvent_function,
    restrict_to,
)

MAXIMAL = "maximal"
NOT_MAXIMAL = "monotone-but-not-maximal"
NOT_MONOTONE = "not-monotone"

DEFAULT_EPS = 1e-9
MUL_BUDGET = 200_000


def _all_curves(*ops) -> bool:
    return all(isinstance(op, MonoCurve) for op in ops)


def _check_same(*ops) -> Orientation:
    o = ops[0].orientation
    if any(op.orientation is not o for op in ops):
        raise OrientationMismatch("operands must share an orientation")
    return o


# named operators ------------------------------------------------------------

def incr(delta: float) -> MonoCurve:
    """Step operator: 1 before ``delta``, 0 after, ``[0, 1]`` at ``delta``."""
    return build_curve(Orientation.DOWN, [(delta, 1.0), (delta, 0.0)], "horizontal", "horizontal")


def incr_pos(delta: float) -> MonoCurve:
    return restrict_to(incr(delta), IntervalR.make(0.0, INF, True, False))


def const(c: float, orientation=Orientation.DOWN) -> MonoCurve:
    return build_curve(orientation, [(0.0, c)], "horizontal", "horizontal")


def const_inv(c: float, orientation=Orientation.DOWN) -> MonoCurve:
    return build_curve(orientation, [(c, 0.0)], "vertical", "vertical")


def modulus(kind: str = "linear", exponent: float = 1.0):
    """Nondecreasing operator with value ``{0}`` at 0 and range ``[0, inf)``."""
    if kind == "linear":
        return build_curve(Orientation.UP, [(0.0, 0.0)], "horizontal", 1.0)
    if kind == "power":
        if not exponent > 0:
            raise BadParameter("modulus exponent must be positive")
        seed = power_seed(exponent)
        from dataclasses import replace

        return replace(seed, lo_end="horizontal", name=f"max(id,0)^{exponent:g}")
    raise BadParameter(f"unknown modulus kind {kind!r}")


def power(a: float):
    """``id^a`` on the half-line.  ``a = 1`` gives an exact curve."""
    if a == 0:
        raise BadParameter("power exponent must be non-zero")
    if a == 1:
        return build_curve(Orientation.UP, [(0.0, 0.0)], "vertical", 1.0)
    return power_seed(a)


def make_named(tag: str, *params):
    """Construct a named operator from its tag and parameters."""
    key = tag.lower()
    if key == "incr":
        return incr(float(params[0]))
    if key in ("incr_pos", "incrpos"):
        return incr_pos(float(params[0]))
    if key == "power":
        return power(float(params[0]))
    if key == "e1":
        return E1()
    if key == "e2":
        return E2()
    if key == "const":
        return const(float(params[0]), *(params[1:2] or ()))
    if key in ("const_inv", "constinv"):
        return const_inv(float(params[0]), *(params[1:2] or ()))
    if key == "modulus":
        return modulus(*params) if params else modulus()
    raise BadParameter(f"unknown operator tag {tag!r}")


# shared helpers --------------------------------------------------------------

def _candidates(curves: Sequence[MonoCurve], D: IntervalR) -> np.ndarray:
    pts = [np.asarray(c.xs) for c in curves]
    ends = [v for v in (D.lo, D.hi) if math.isfinite(v)]
    xs = np.unique(np.concatenate(pts + [np.asarray(ends, dtype=float)]))
    return xs[(xs >= D.lo) & (xs <= D.hi)]


def _one_sided(c: MonoCurve, x: np.ndarray):
    """Up-normalised right limit at ``x[:-1]`` and left limit at ``x[1:]``."""
    lo, hi = c.images_up(x)
    return hi[:-1], lo[1:]


def _end_slope(c: MonoCurve, side: str) -> float:
    r = c.left_ray if side == "left" else c.right_ray
    return r[1] / r[0]


# sum ------------------------------------------------------------------------

def op_add(f, g):
    """Pointwise Minkowski sum on the common domain."""
    o = _check_same(f, g)
    if not _all_curves(f, g):
        return lazy.Add(f, g)
    if f.empty or g.empty:
        return empty_curve(o)
    D = domain(f).intersect(domain(g))
    if D.is_empty:
        return empty_curve(o)
    xs = _candidates([f, g], D)
    flo, fhi = f.images_up(xs)
    glo, ghi = g.images_up(xs)
    lo, hi = flo + glo, fhi + ghi
    X, U = [], []
    lr = rr = None
    for k, x in enumerate(xs):
        if np.isfinite(lo[k]):
            X.append(x)
            U.append(lo[k])
        elif k == 0:
            lr = VERTICAL
        if np.isfinite(hi[k]):
            X.append(x)
            U.append(hi[k])
        elif k == len(xs) - 1:
            rr = VERTICAL
    if D.lo == -INF:
        lr = ray_from_slope(_end_slope(f, "left") + _end_slope(g, "left"))
    if D.hi == INF:
        rr = ray_from_slope(_end_slope(f, "right") + _end_slope(g, "right"))
    if not X:
        X, U = [xs[0]], [0.0]
        lr = rr = VERTICAL
    return _from_up(o, X, U, lr, rr)


def op_parallel_sum(f, g):
    """``(f^-1 + g^-1)^-1``."""
    _check_same(f, g)
    if not _all_curves(f, g):
        return lazy.parallel_sum(f, g)
    return invert(op_add(invert(f), invert(g)))


# product --------------------------------------------------------------------

def _actual(o: Orientation, lo_u, hi_u):
    return (lo_u, hi_u) if o is Orientation.UP else (-hi_u, -lo_u)


def _prod_interval(alo, ahi, blo, bhi):
    """Product of images in ``[0, inf]``; ``-inf`` lower ends mark a vertical completion."""
    neg = (alo == -INF) | (blo == -INF)
    with np.errstate(invalid="ignore"):
        lo = np.where((alo == 0) | (blo == 0), 0.0, alo * blo)
        hi = np.where((ahi == 0) | (bhi == 0), 0.0, ahi * bhi)
    return np.where(neg, -INF, lo), hi


def _check_nonneg_range(c: MonoCurve):
    if c.empty:
        return
    ys = np.asarray(c.ys)
    if np.any(ys < 0):
        raise NegativeRange("product operands need values in [0, inf)")
    o = c.orientation
    sloped_down = c.left_ray if o is Orientation.UP else c.right_ray
    if sloped_down is not None and sloped_down[0] > 0 and sloped_down[1] > 0:
        raise NegativeRange("product operand takes negative values on an unbounded ray")


def op_mul(f, g, direction: str = "upper", eps: float = DEFAULT_EPS, budget: int = MUL_BUDGET):
    """Pointwise Minkowski product of operators with values in ``[0, inf)``.

    A product of two sloped pieces is quadratic; it is replaced by chords
    (``direction="upper"``) or tangents (``"lower"``) within ``eps``.
    Piecewise-constant operands give exact results.
    """
    o = _check_same(f, g)
    if not _all_curves(f, g):
        return lazy.Mul(f, g)
    _check_nonneg_range(f)
    _check_nonneg_range(g)
    if f.empty or g.empty:
        return empty_curve(o)
    D = domain(f).intersect(domain(g))
    if D.is_empty:
        return empty_curve(o)
    upper = direction.lower() == "upper"
    xs = _candidates([f, g], D)
    flo, fhi = _actual(o, *f.images_up(xs))
    glo, ghi = _actual(o, *g.images_up(xs))
    plo, phi = _prod_interval(flo, fhi, glo, ghi)
    plo_u, phi_u = _to_u(o, plo, phi)
    fr, fl = _one_sided(f, xs)
    gr, gl = _one_sided(g, xs)
    s = o.sign
    pts: list[tuple[float, float]] = []
    lr = rr = None
    total = 0
    for k, x in enumerate(xs):
        if np.isfinite(plo_u[k]):
            pts.append((x, plo_u[k]))
        elif k == 0:
            lr = VERTICAL
        if np.isfinite(phi_u[k]):
            pts.append((x, phi_u[k]))
        elif k == len(xs) - 1:
            rr = VERTICAL
        if k + 1 < len(xs):
            fa, fb = s * fr[k], s * fl[k]
            ga, gb = s * gr[k], s * gl[k]
            seg = _quad_pieces(x, xs[k + 1], fa, fb, ga, gb, upper, eps, budget - total)
            total += len(seg)
            pts.extend((px, s * py) for px, py in seg)
    span = max(1.0, float(xs[-1] - xs[0]))
    if D.lo == -INF:
        extra, lr = _mul_ray(f, g, o, "left", xs[0], upper, eps, span, budget - total)
        pts = extra + pts
    if D.hi == INF:
        extra, rr = _mul_ray(f, g, o, "right", xs[-1], upper, eps, span, budget - total)
        pts = pts + extra
    if not pts:
        pts = [(xs[0], 0.0)]
        lr = rr = VERTICAL
    return _from_up(o, [p[0] for p in pts], [p[1] for p in pts], lr, rr)


def _to_u(o: Orientation, lo, hi):
    return (lo, hi) if o is Orientation.UP else (-hi, -lo)


def _quad_pieces(x0, x1, fa, fb, ga, gb, upper, eps, budget):
    """Interior vertices approximating ``(fa + (fb-fa)s)(ga + (gb-ga)s)`` on (x0, x1)."""
    A = (fb - fa) * (gb - ga)
    if A <= 0 or not np.isfinite(A):
        return []
    n = int(math.ceil(math.sqrt(A / (4.0 * eps))))
    if n > budget:
        from .errors import ToleranceUnreachable

        raise ToleranceUnreachable("product needs too many segments")
    if n <= 1 and upper:
        return []
    h = 1.0 / n
    if upper:
        sk = np.arange(1, n) * h
        vals = (fa + (fb - fa) * sk) * (ga + (gb - ga) * sk)
        return list(zip(x0 + (x1 - x0) * sk, vals))
    sm = (np.arange(n) + 0.5) * h
    vals = (fa + (fb - fa) * sm) * (ga + (gb - ga) * sm) - A * h * h / 4.0
    return list(zip(x0 + (x1 - x0) * sm, vals))


def _mul_ray(f, g, o, side, x_end, upper, eps, span, budget):
    """Vertices beyond the outermost candidate and the resulting ray."""
    s = o.sign
    sf, sg = _end_slope(f, side), _end_slope(g, side)
    lo_f, hi_f = f.images_up(np.array([x_end]))
    lo_g, hi_g = g.images_up(np.array([x_end]))
    if side == "left":
        F, G = s * lo_f[0], s * lo_g[0]
    else:
        F, G = s * hi_f[0], s * hi_g[0]
    # outward actual slopes per unit distance
    direction = -1.0 if side == "left" else 1.0
    a = s * sf * direction
    b = s * sg * direction
    if a == 0 or b == 0:
        slope_u = abs(F * b + G * a)
        return [], ray_from_slope(slope_u)
    # quadratic growth: approximate on a finite stretch
    W = span
    pts = _quad_pieces(0.0, W, F, F + a * W, G, G + b * W, upper, eps, budget)
    far_val = (F + a * W) * (G + b * W)
    pts = pts + [(W, far_val)]
    out = [(x_end + direction * t, s * v) for t, v in pts]
    if side == "left":
        out = out[::-1]
    if upper:
        return out, VERTICAL
    # tangent slope at the far end, outward
    tangent = a * (G + b * W) + b * (F + a * W)
    return out, ray_from_slope(abs(tangent))


def op_parallel_product(f, g, direction: str = "upper", eps: float = DEFAULT_EPS):
    """``(f^-1 . g^-1)^-1`` for operators with domains in ``[0, inf)``."""
    o = _check_same(f, g)
    for op in (f, g):
        d = op.domain()
        if not d.is_empty and d.lo < 0:
            raise NegativeDomain("parallel product needs domains inside [0, inf)")
    if not _all_curves(f, g):
        return lazy.parallel_product(f, g)
    # inversion reverses the order for nondecreasing operators
    inner = direction
    if o is Orientation.UP:
        inner = "lower" if direction.lower() == "upper" else "upper"
    return invert(op_mul(invert(f), invert(g), inner, eps))


# composition ----------------------------------------------------------------

def op_compose(outer, inner):
    """Graph composition ``outer o inner`` with a maximality verdict.

    Returns ``(operator, verdict)``.  For a non-monotone composition the
    operator is the empty curve.
    """
    if not _all_curves(outer, inner):
        c = lazy.Compose(outer, inner)
        return c, c.verdict()
    o = outer.orientation.times(inner.orientation)
    if outer.empty or inner.empty:
        return empty_curve(o), NOT_MAXIMAL
    comp = lazy.Compose(outer, inner)
    Do = domain(outer)
    inv = invert(inner)
    cand = [np.asarray(inner.xs)]
    targets = list(outer.xs) + [v for v in (Do.lo, Do.hi) if math.isfinite(v)]
    if targets:
        a, b = inv.images(np.asarray(targets, dtype=float))
        cand += [a[np.isfinite(a)], b[np.isfinite(b)]]
    Di = domain(inner)
    cand.append(np.asarray([v for v in (Di.lo, Di.hi) if math.isfinite(v)], dtype=float))
    xs = np.unique(np.concatenate(cand))
    lo, hi = comp.images_up(xs)
    keep = ~np.isnan(lo)
    xs, lo, hi = xs[keep], lo[keep], hi[keep]
    if xs.size == 0:
        return empty_curve(o), NOT_MAXIMAL
    tol = 1e-9
    scale = lambda v: tol * max(1.0, abs(v)) if math.isfinite(v) else 0.0  # noqa: E731
    for k in range(len(xs) - 1):
        if hi[k] > lo[k + 1] + scale(hi[k]):
            return empty_curve(o), NOT_MONOTONE
        if (k > 0 and lo[k] == -INF) or (k + 1 < len(xs) - 1 and hi[k + 1] == INF):
            return empty_curve(o), NOT_MONOTONE
    if len(xs) > 1:
        mids = 0.5 * (xs[:-1] + xs[1:])
        mlo, mhi = comp.images_up(mids)
        gap_ok = np.isnan(mlo) | (np.abs(mhi - mlo) <= tol * np.maximum(1.0, np.abs(mlo)))
        if not np.all(gap_ok):
            return empty_curve(o), NOT_MONOTONE
        if np.any(np.isnan(mlo)):
            return empty_curve(o), NOT_MAXIMAL
    pts: list[tuple[float, float]] = []
    lr = rr = None
    for k, x in enumerate(xs):
        if np.isfinite(lo[k]):
            pts.append((x, lo[k]))
        elif k == 0:
            lr = VERTICAL
        if np.isfinite(hi[k]):
            pts.append((x, hi[k]))
        elif k == len(xs) - 1:
            rr = VERTICAL
    for side in ("left", "right"):
        x0 = xs[0] if side == "left" else xs[-1]
        u0 = lo[0] if side == "left" else hi[-1]
        step = max(1.0, abs(x0))
        probe = x0 - step if side == "left" else x0 + step
        plo, phi = comp.images_up(np.array([probe]))
        if np.isnan(plo[0]):
            continue
        if not np.isfinite(u0) or abs(phi[0] - plo[0]) > tol * max(1.0, abs(plo[0])):
            return empty_curve(o), NOT_MONOTONE
        slope = (u0 - plo[0]) / step if side == "left" else (plo[0] - u0) / step
        if slope < -tol:
            return empty_curve(o), NOT_MONOTONE
        ray = ray_from_slope(max(slope, 0.0))
        if side == "left":
            lr = ray
        else:
            rr = ray
    if not pts:
        pts = [(xs[0], 0.0)]
    curve = _from_up(o, [p[0] for p in pts], [p[1] for p in pts], lr, rr)
    return curve, (MAXIMAL if check_maximal(curve) else NOT_MAXIMAL)


# min / max ------------------------------------------------------------------

def _extremum(family, take_min: bool):
    members = [f for f in family if not (isinstance(f, MonoCurve) and f.empty)]
    if not family:
        raise BadParameter("min/max of an empty family")
    if not members:
        return family[0]
    o = _check_same(*members)
    if not _all_curves(*members):
        return lazy.Extremum(members, take_min)
    for f in members:
        if not check_maximal(f):
            raise NotMaximal("min/max via resolvents needs maximal operators")
    if len(members) == 1:
        return members[0]
    Js = [resolvent_function(f) for f in members]
    # larger operator <-> smaller resolvent for nondecreasing operators
    take_max_J = take_min == (o is Orientation.UP)
    J = pointwise_extremum(Js, take_max=take_max_J)
    return from_resolvent(J.to_curve(), o)


def op_min(family):
    return _extremum(list(family), take_min=True)


def op_max(family):
    return _extremum(list(family), take_min=False)


# argument / value transforms -------------------------------------------------

def op_shift_arg(f, delta: float):
    """``f o (id + delta)``."""
    if isinstance(f, MonoCurve):
        if f.empty:
            return f
        return _from_up(f.orientation, [x - delta for x in f.xs], list(f.us), f.left_ray, f.right_ray)
    if isinstance(f, AnalyticSeed):
        return f.affine_arg(1.0, -delta)
    return lazy.AffineArg(f, 1.0, -delta)


def op_scale_arg(f, lam: float):
    """``f o (lam id)`` for ``lam > 0``."""
    if not lam > 0:
        raise BadParameter("argument scale must be positive")
    if isinstance(f, MonoCurve):
        if f.empty or lam == 1:
            return f
        lr = None if f.left_ray is None else _rescale_dir(f.left_ray, 1.0 / lam, 1.0)
        rr = None if f.right_ray is None else _rescale_dir(f.right_ray, 1.0 / lam, 1.0)
        return _from_up(f.orientation, [x / lam for x in f.xs], list(f.us), lr, rr)
    if isinstance(f, AnalyticSeed):
        return f.affine_arg(1.0 / lam, 0.0)
    return lazy.AffineArg(f, 1.0 / lam, 0.0)


def op_scale_value(f, c: float):
    """``c f`` for ``c > 0``."""
    if not c > 0:
        raise BadParameter("value scale must be positive")
    if isinstance(f, MonoCurve):
        if f.empty:
            return f
        lr = None if f.left_ray is None else _rescale_dir(f.left_ray, 1.0, c)
        rr = None if f.right_ray is None else _rescale_dir(f.right_ray, 1.0, c)
        return _from_up(f.orientation, list(f.xs), [c * u for u in f.us], lr, rr)
    if isinstance(f, AnalyticSeed):
        return f.scale_value(c)
    return lazy.AffineValue(f, c, 0.0)


def _rescale_dir(d, sx, sy):
    dx, dy = d[0] * sx, d[1] * sy
    m = max(dx, dy)
    return (dx / m, dy / m)


def op_invert(f):
    if isinstance(f, MonoCurve):
        return invert(f)
    return f.inverse()


def op_restrict(f, A: IntervalR):
    if isinstance(f, MonoCurve):
        return restrict_to(f, A)
    return lazy.Restrict(f, A)


def op_negate(f):
    """``-f``; flips the orientation."""
    if isinstance(f, MonoCurve):
        if f.empty:
            return empty_curve(Orientation.DOWN if f.orientation is Orientation.UP else Orientation.UP)
        o = Orientation.DOWN if f.orientation is Orientation.UP else Orientation.UP
        # actual y -> -y keeps the up-normalised ordinate unchanged
        return _from_up(o, list(f.xs), list(f.us), f.left_ray, f.right_ray)
    return lazy.Negate(f)


def range_sum_holds(f: MonoCurve, g: MonoCurve, tol: float = 1e-9) -> bool:
    """Check ``ran(f + g) == ran(f) + ran(g)`` for maximal operands."""
    s = op_add(f, g)
    if s.empty:
        return True
    return range_of(s).approx_equal(range_of(f) + range_of(g), tol)


__all__ = [
    "MAXIMAL",
    "NOT_MAXIMAL",
    "NOT_MONOTONE",
    "HORIZONTAL",
    "make_named",
    "incr",
    "incr_pos",
    "const",
    "const_inv",
    "modulus",
    "power",
    "op_add",
    "op_mul",
    "op_parallel_sum",
    "op_parallel_product",
    "op_compose",
    "op_min",
    "op_max",
    "op_shift_arg",
    "op_scale_arg",
    "op_scale_value",
    "op_invert",
    "op_restrict",
    "op_negate",
    "range_sum_holds",
]
