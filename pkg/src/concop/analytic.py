"""Closed-form monotone operators and their certified piecewise-linear envelopes.

An :class:`AnalyticSeed` is a strictly monotone continuous function on an open
interval, completed at each finite end by one of

``"vertical"``    the image at the end point is a ray (maximal completion),
``"horizontal"``  the end value is held constant beyond the end point,
``"point"``       the end point belongs to the domain with its limit value,
``"open"``        the end point is excluded.

Inversion swaps vertical and horizontal ends, so seeds are closed under
inversion.  :func:`envelope_of_analytic` turns a seed into a :class:`MonoCurve`
lying above or below it in the resolvent order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import BadParameter, ToleranceUnreachable
from .intervals import INF, IntervalR
from .monotone_graph import HORIZONTAL, VERTICAL, MonoCurve, Orientation, _from_up

Fn = Callable[[np.ndarray], np.ndarray]
_SWAP_END = {"vertical": "horizontal", "horizontal": "vertical", "open": "open", "point": "point"}

TAIL_RESIDUAL = 1e-12
DEFAULT_BUDGET = 400_000


def _quiet(fn: Fn, x) -> np.ndarray:
    with np.errstate(all="ignore"):
        return np.asarray(fn(np.asarray(x, dtype=float)), dtype=float)


def _numeric_derivative(fn: Fn) -> Fn:
    def d(x):
        x = np.asarray(x, dtype=float)
        h = 1e-6 * np.maximum(1.0, np.abs(x))
        return (_quiet(fn, x + h) - _quiet(fn, x - h)) / (2 * h)

    return d


@dataclass(frozen=True, eq=False)
class AnalyticSeed:
    """Strictly monotone closed-form operator (see module docstring)."""

    orientation: Orientation
    fn: Fn
    inv: Fn
    lo: float
    hi: float
    lo_end: str = "open"
    hi_end: str = "open"
    deriv: Fn | None = None
    inflections: tuple[float, ...] | None = ()
    name: str = "seed"
    lim_lo: float | None = None
    lim_hi: float | None = None
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.lo < self.hi:
            raise BadParameter(f"empty seed core ({self.lo}, {self.hi})")
        for end in (self.lo_end, self.hi_end):
            if end not in _SWAP_END:
                raise BadParameter(f"unknown end kind {end!r}")
        if self.lim_lo is None:
            object.__setattr__(self, "lim_lo", float(_quiet(self.fn, self.lo)))
        if self.lim_hi is None:
            object.__setattr__(self, "lim_hi", float(_quiet(self.fn, self.hi)))

    # helpers -------------------------------------------------------------
    @property
    def sign(self) -> float:
        return self.orientation.sign

    def u(self, x) -> np.ndarray:
        """Up-normalised core value."""
        return self.sign * _quiet(self.fn, x)

    def du(self, x) -> np.ndarray:
        d = self.deriv if self.deriv is not None else _numeric_derivative(self.fn)
        return self.sign * _quiet(d, x)

    @property
    def u_lo(self) -> float:
        return self.sign * self.lim_lo

    @property
    def u_hi(self) -> float:
        return self.sign * self.lim_hi

    # evaluation ----------------------------------------------------------
    def images_up(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lo = np.full(x.shape, np.nan)
        hi = np.full(x.shape, np.nan)
        core = (x > self.lo) & (x < self.hi)
        if core.any():
            v = self.u(x[core])
            lo[core] = v
            hi[core] = v
        if math.isfinite(self.lo):
            at = x == self.lo
            kind = self.lo_end
            if kind == "vertical":
                lo[at], hi[at] = -INF, self.u_lo
            elif kind in ("point", "horizontal"):
                lo[at], hi[at] = self.u_lo, self.u_lo
            if kind == "horizontal":
                left = x < self.lo
                lo[left], hi[left] = self.u_lo, self.u_lo
        if math.isfinite(self.hi):
            at = x == self.hi
            kind = self.hi_end
            if kind == "vertical":
                lo[at], hi[at] = self.u_hi, INF
            elif kind in ("point", "horizontal"):
                lo[at], hi[at] = self.u_hi, self.u_hi
            if kind == "horizontal":
                right = x > self.hi
                lo[right], hi[right] = self.u_hi, self.u_hi
        return lo, hi

    def images(self, x) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.images_up(x)
        if self.orientation is Orientation.UP:
            return lo, hi
        return -hi, -lo

    def __call__(self, x: float) -> IntervalR:
        lo, hi = self.images(np.array([float(x)]))
        if math.isnan(lo[0]):
            return IntervalR.empty()
        return IntervalR.make(lo[0], hi[0])

    def domain(self) -> IntervalR:
        lo, lc = self.lo, self.lo_end in ("vertical", "point")
        hi, hc = self.hi, self.hi_end in ("vertical", "point")
        if self.lo_end == "horizontal":
            lo = -INF
        if self.hi_end == "horizontal":
            hi = INF
        return IntervalR.make(lo, hi, lc, hc)

    def range(self) -> IntervalR:
        finite_lo = math.isfinite(self.lo)
        finite_hi = math.isfinite(self.hi)
        ulo, lc = self.u_lo, finite_lo and self.lo_end in ("horizontal", "point")
        uhi, hc = self.u_hi, finite_hi and self.hi_end in ("horizontal", "point")
        if finite_lo and self.lo_end == "vertical":
            ulo = -INF
        if finite_hi and self.hi_end == "vertical":
            uhi = INF
        r = IntervalR.make(ulo, uhi, lc, hc)
        return r if self.orientation is Orientation.UP else -r

    def is_maximal(self) -> bool:
        d, r = self.domain(), self.range()
        total = d + r if self.orientation is Orientation.UP else r + (-d)
        return total.lo == -INF and total.hi == INF

    # transforms ----------------------------------------------------------
    def inverse(self) -> "AnalyticSeed":
        fn, inv = self.fn, self.inv
        deriv = self.deriv
        inv_deriv = None
        if deriv is not None:
            inv_deriv = lambda y: 1.0 / _quiet(deriv, _quiet(inv, y))  # noqa: E731
        infl = None
        if self.inflections is not None:
            infl = tuple(sorted(float(_quiet(fn, t)) for t in self.inflections))
        if self.orientation is Orientation.UP:
            lo, hi = self.lim_lo, self.lim_hi
            lo_end, hi_end = _SWAP_END[self.lo_end], _SWAP_END[self.hi_end]
            lim_lo, lim_hi = self.lo, self.hi
        else:
            lo, hi = self.lim_hi, self.lim_lo
            lo_end, hi_end = _SWAP_END[self.hi_end], _SWAP_END[self.lo_end]
            lim_lo, lim_hi = self.hi, self.lo
        return AnalyticSeed(self.orientation, inv, fn, lo, hi, lo_end, hi_end, inv_deriv, infl,
                            f"inv({self.name})", lim_lo, lim_hi)

    def affine_arg(self, scale: float, shift: float = 0.0) -> "AnalyticSeed":
        """``x -> f((x - shift) / scale)`` for ``scale > 0``."""
        if not scale > 0:
            raise BadParameter("argument scale must be positive")
        fn, inv, d = self.fn, self.inv, self.deriv
        new_d = None if d is None else (lambda x: _quiet(d, (x - shift) / scale) / scale)
        infl = None if self.inflections is None else tuple(scale * t + shift for t in self.inflections)
        return AnalyticSeed(
            self.orientation,
            lambda x: fn((x - shift) / scale),
            lambda y: scale * inv(y) + shift,
            scale * self.lo + shift,
            scale * self.hi + shift,
            self.lo_end,
            self.hi_end,
            new_d,
            infl,
            f"{self.name}((id-{shift:g})/{scale:g})",
            self.lim_lo,
            self.lim_hi,
        )

    def scale_value(self, c: float) -> "AnalyticSeed":
        if not c > 0:
            raise BadParameter("value scale must be positive")
        fn, inv, d = self.fn, self.inv, self.deriv
        return AnalyticSeed(
            self.orientation,
            lambda x: c * fn(x),
            lambda y: inv(y / c),
            self.lo,
            self.hi,
            self.lo_end,
            self.hi_end,
            None if d is None else (lambda x: c * d(x)),
            self.inflections,
            f"{c:g}*{self.name}",
            c * self.lim_lo,
            c * self.lim_hi,
        )

    def restrict_core(self, lo: float, hi: float, lo_end: str, hi_end: str) -> "AnalyticSeed":
        infl = None if self.inflections is None else tuple(t for t in self.inflections if lo < t < hi)
        return replace(self, lo=lo, hi=hi, lo_end=lo_end, hi_end=hi_end, inflections=infl,
                       lim_lo=None, lim_hi=None)


# families ------------------------------------------------------------------

def exp_power(K: float, c: float, p: float, name: str | None = None) -> AnalyticSeed:
    """``t -> K exp(-c t^p)`` on ``t > 0`` with image ``[K, inf)`` at 0."""
    if not (K > 0 and c > 0 and p > 0):
        raise BadParameter("exp_power needs K, c, p > 0")

    def fn(t):
        return K * np.exp(-c * np.power(t, p))

    def inv(y):
        return np.power(np.log(K / y) / c, 1.0 / p)

    def deriv(t):
        return -K * c * p * np.power(t, p - 1.0) * np.exp(-c * np.power(t, p))

    infl = ()
    if p > 1:
        infl = (((p - 1.0) / (c * p)) ** (1.0 / p),)
    seed = AnalyticSeed(Orientation.DOWN, fn, inv, 0.0, INF, "vertical", "open", deriv, infl,
                        name or f"{K:g}exp(-{c:g}t^{p:g})", K, 0.0)
    seed.meta.update(family="exp_power", K=K, c=c, p=p)
    return seed


def E1() -> AnalyticSeed:
    return exp_power(1.0, 1.0, 1.0, "E1")


def E2() -> AnalyticSeed:
    return exp_power(2.0, 0.5, 2.0, "E2")


def power_seed(a: float) -> AnalyticSeed:
    """``id^a`` on the half-line; ``id^a(0) = (-inf, 0]`` for ``a > 0``."""
    if a == 0:
        raise BadParameter("power exponent must be non-zero")

    def fn(t):
        return np.power(t, a)

    def inv(y):
        return np.power(y, 1.0 / a)

    def deriv(t):
        return a * np.power(t, a - 1.0)

    if a > 0:
        seed = AnalyticSeed(Orientation.UP, fn, inv, 0.0, INF, "vertical", "open", deriv, (),
                            f"id^{a:g}", 0.0, INF)
    else:
        seed = AnalyticSeed(Orientation.DOWN, fn, inv, 0.0, INF, "open", "open", deriv, (),
                            f"id^{a:g}", INF, 0.0)
    seed.meta.update(family="power", a=a)
    return seed


def exp_seed() -> AnalyticSeed:
    return AnalyticSeed(Orientation.UP, np.exp, np.log, -INF, INF, "open", "open", np.exp, (), "exp",
                        0.0, INF)


def log_seed() -> AnalyticSeed:
    return exp_seed().inverse()


# envelopes -----------------------------------------------------------------

def _tail_point(seed: AnalyticSeed, side: str, tol: float) -> float:
    """Finite window end where the core is within ``tol`` of its limit."""
    target = seed.u_hi if side == "hi" else seed.u_lo
    if not math.isfinite(target):
        raise BadParameter("an explicit window is needed for an unbounded operator")
    start = seed.lo if side == "hi" else seed.hi
    base = start if math.isfinite(start) else 0.0
    step = 1.0
    for _ in range(2000):
        x = base + step if side == "hi" else base - step
        if abs(float(seed.u(x)) - target) < tol:
            return x
        step *= 1.5
    raise ToleranceUnreachable("tail of the operator never reaches its limit")


def _convex_pieces(seed: AnalyticSeed, a: float, b: float) -> list[float]:
    if seed.inflections is not None:
        cuts = [t for t in seed.inflections if a < t < b]
    else:
        grid = np.linspace(a, b, 4097)
        u = seed.u(grid)
        d2 = u[2:] - 2 * u[1:-1] + u[:-2]
        sgn = np.sign(d2)
        cuts = [float(grid[i + 1]) for i in range(len(sgn) - 1) if sgn[i] * sgn[i + 1] < 0]
    return [a] + cuts + [b]


def _tangent_meet(x0, u0, s0, x1, u1, s1):
    """Intersection of the tangents at both ends (slopes may be infinite)."""
    th0, th1 = np.arctan(s0), np.arctan(s1)
    d0 = np.stack([np.cos(th0), np.sin(th0)])
    d1 = np.stack([np.cos(th1), np.sin(th1)])
    cross = d0[0] * d1[1] - d0[1] * d1[0]
    rx, ru = x1 - x0, u1 - u0
    with np.errstate(all="ignore"):
        t = (rx * d1[1] - ru * d1[0]) / cross
    xp = x0 + t * d0[0]
    up = u0 + t * d0[1]
    bad = ~np.isfinite(xp) | ~np.isfinite(up) | (np.abs(cross) < 1e-15)
    xp = np.where(bad, 0.5 * (x0 + x1), xp)
    up = np.where(bad, 0.5 * (u0 + u1), up)
    xp = np.where(np.isinf(s0), x0, np.where(np.isinf(s1), x1, xp))
    xp = np.clip(xp, x0, x1)
    up = np.clip(up, np.minimum(u0, u1), np.maximum(u0, u1))
    return xp, up


def _refine(seed: AnalyticSeed, a: float, b: float, eps: float, budget: int):
    """Adaptive chord/tangent split of one convex or concave piece."""
    xm = 0.5 * (a + b)
    um = float(seed.u(xm))
    ua, ub = float(seed.u(a)), float(seed.u(b))
    convex = um <= ua + (ub - ua) * 0.5
    pending = [np.array([a, b])]
    done_x0, done_x1 = [], []
    total = 0
    while pending:
        lvl = np.concatenate(pending)
        x0, x1 = lvl[0::2], lvl[1::2]
        u0, u1 = seed.u(x0), seed.u(x1)
        s0, s1 = seed.du(x0), seed.du(x1)
        s0 = np.where(np.isnan(s0), INF, np.maximum(s0, 0.0))
        s1 = np.where(np.isnan(s1), INF, np.maximum(s1, 0.0))
        xp, up = _tangent_meet(x0, u0, s0, x1, u1, s1)
        with np.errstate(all="ignore"):
            slope = (u1 - u0) / (x1 - x0)
            chord_at = u0 + slope * (xp - x0)
            v = np.abs(chord_at - up)
            h = np.where(slope > 0, np.abs(xp - (x0 + (up - u0) / slope)), INF)
        gap = np.minimum(v, h)
        gap = np.where(np.isfinite(gap), gap, INF)
        tiny = (x1 - x0) <= 4 * np.spacing(np.maximum(np.abs(x0), np.abs(x1)))
        ok = (gap <= eps) | tiny
        done_x0.append(x0[ok])
        done_x1.append(x1[ok])
        total += int(ok.sum())
        if total > budget:
            raise ToleranceUnreachable(f"envelope needs more than {budget} segments")
        bad = ~ok
        if not bad.any():
            break
        mid = 0.5 * (x0[bad] + x1[bad])
        pending = [np.stack([x0[bad], mid, mid, x1[bad]], axis=1).reshape(-1)]
        if total + 2 * int(bad.sum()) > 4 * budget:
            raise ToleranceUnreachable(f"envelope needs more than {budget} segments")
    x0 = np.concatenate(done_x0)
    x1 = np.concatenate(done_x1)
    order = np.argsort(x0)
    return x0[order], x1[order], convex


def envelope_of_analytic(
    seed: AnalyticSeed,
    direction: str = "upper",
    eps: float = 1e-9,
    window: tuple[float, float] | IntervalR | None = None,
    budget: int = DEFAULT_BUDGET,
) -> MonoCurve:
    """PL curve above (``"upper"``) or below (``"lower"``) ``seed`` in resolvent order.

    Inside the window the graph distance to the seed is at most ``eps``.
    Outside the window the curve continues conservatively: held constant on
    the side where that over- or under-estimates, and jumping to the limit
    value of the seed on the other side.
    """
    direction = direction.lower()
    if direction not in ("upper", "lower"):
        raise BadParameter("direction must be 'upper' or 'lower'")
    if not eps > 0:
        raise BadParameter("eps must be positive")
    if isinstance(window, IntervalR):
        window = (window.lo, window.hi)
    if window is None:
        a = seed.lo if math.isfinite(seed.lo) else _tail_point(seed, "lo", TAIL_RESIDUAL)
        b = seed.hi if math.isfinite(seed.hi) else _tail_point(seed, "hi", TAIL_RESIDUAL)
    else:
        a, b = float(window[0]), float(window[1])
        a, b = max(a, seed.lo), min(b, seed.hi)
    if not a < b:
        raise BadParameter("envelope window must meet the interior of the domain")
    # u-high is the larger curve in up-normalised coordinates
    u_high = (direction == "upper") == (seed.orientation is Orientation.UP)
    xs_all, us_all = [], []
    cuts = _convex_pieces(seed, a, b)
    for p0, p1 in zip(cuts[:-1], cuts[1:]):
        x0, x1, convex = _refine(seed, p0, p1, eps, budget)
        u0, u1 = _end_values(seed, x0), _end_values(seed, x1)
        use_chord = convex == u_high
        xs_all.append(x0)
        us_all.append(u0)
        if not use_chord:
            s0 = seed.du(x0)
            s1 = seed.du(x1)
            s0 = np.where(np.isnan(s0), INF, np.maximum(s0, 0.0))
            s1 = np.where(np.isnan(s1), INF, np.maximum(s1, 0.0))
            xp, up = _tangent_meet(x0, u0, s0, x1, u1, s1)
            xs_all.append(xp)
            us_all.append(up)
        xs_all.append(x1[-1:])
        us_all.append(u1[-1:])
    X = np.concatenate(xs_all)
    U = np.concatenate(us_all)
    order = np.argsort(X, kind="stable")
    X, U = X[order], U[order]
    # a few ulps of slack keep the envelope on the safe side of round-off
    pad = 8 * np.spacing(np.maximum(1.0, np.abs(U)))
    U = np.maximum.accumulate(U + pad if u_high else U - pad)
    X, U, lr = _left_extension(seed, list(X), list(U), a, u_high)
    X, U, rr = _right_extension(seed, X, U, b, u_high)
    if len(X) + 2 > budget * 4:
        raise ToleranceUnreachable(f"envelope needs more than {budget} vertices")
    curve = _from_up(seed.orientation, X, U, lr, rr)
    if len(curve.xs) > budget:
        raise ToleranceUnreachable(f"envelope needs more than {budget} vertices")
    return curve


def _end_values(seed: AnalyticSeed, x: np.ndarray) -> np.ndarray:
    u = seed.u(x)
    u = np.where(x <= seed.lo, seed.u_lo, u)
    u = np.where(x >= seed.hi, seed.u_hi, u)
    return u


def _left_extension(seed, X, U, a, u_high):
    if a == seed.lo:
        kind = seed.lo_end
        if kind == "vertical":
            return X, U, VERTICAL
        if kind == "horizontal":
            return X, U, HORIZONTAL
        return X, U, None
    if u_high:
        return X, U, HORIZONTAL
    floor = seed.u_lo
    reaches = (not math.isfinite(seed.lo)) or seed.lo_end == "horizontal"
    if reaches and math.isfinite(floor):
        return [a] + X, [floor] + U, HORIZONTAL
    return X, U, VERTICAL


def _right_extension(seed, X, U, b, u_high):
    if b == seed.hi:
        kind = seed.hi_end
        if kind == "vertical":
            return X, U, VERTICAL
        if kind == "horizontal":
            return X, U, HORIZONTAL
        return X, U, None
    if not u_high:
        return X, U, HORIZONTAL
    ceil = seed.u_hi
    reaches = (not math.isfinite(seed.hi)) or seed.hi_end == "horizontal"
    if reaches and math.isfinite(ceil):
        return X + [b], U + [ceil], HORIZONTAL
    return X, U, VERTICAL
