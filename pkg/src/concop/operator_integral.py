"""Integrals and moments of nonincreasing operators.

Piecewise-linear curves are integrated exactly.  A region on the left of the
domain counts as ``+inf`` and a region on the right as ``-inf``, matching the
supremum over staircase minorants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import BadBounds, BadParameter, NotProbOp, OrientationMismatch
from .intervals import INF
from .monotone_graph import (
    HORIZONTAL,
    VERTICAL,
    MonoCurve,
    Orientation,
    build_curve,
    check_maximal,
    domain,
    invert,
    range_of,
)


@dataclass(frozen=True)
class SimpleOp:
    """Staircase ``max_i levels[i] * Incr_{thresholds[i]}`` with non-negative levels."""

    levels: tuple[float, ...]
    thresholds: tuple[float, ...]

    def __post_init__(self):
        ys, xs = tuple(map(float, self.levels)), tuple(map(float, self.thresholds))
        if len(ys) != len(xs) or not ys:
            raise BadParameter("a simple operator needs matching, non-empty levels and thresholds")
        if any(b > a for a, b in zip(ys, ys[1:])) or any(b < a for a, b in zip(xs, xs[1:])):
            raise BadParameter("levels must be nonincreasing and thresholds nondecreasing")
        if ys[-1] < 0 or not all(map(math.isfinite, ys + xs)):
            raise BadParameter("levels must be finite and non-negative")
        object.__setattr__(self, "levels", ys)
        object.__setattr__(self, "thresholds", xs)

    def to_curve(self) -> MonoCurve:
        verts = []
        nxt = self.levels[1:] + (0.0,)
        for x, y, y_next in zip(self.thresholds, self.levels, nxt):
            verts += [(x, y), (x, y_next)]
        return build_curve(Orientation.DOWN, verts, HORIZONTAL, HORIZONTAL)

    def integral(self, a: float = 0.0, b: float = INF) -> float:
        if a > b:
            raise BadBounds(f"lower bound {a} exceeds upper bound {b}")
        total, prev = 0.0, a
        for x, y in zip(self.thresholds, self.levels):
            hi = min(b, x)
            if hi > prev and y > 0:
                if math.isinf(hi - prev):
                    return INF
                total += (hi - prev) * y
            prev = max(prev, hi)
        return total

    def inverse(self) -> "SimpleOp":
        """``max_k thresholds[k] * Incr_{levels[k]}``; needs non-negative thresholds."""
        if self.thresholds[0] < 0:
            raise BadParameter("inverting a staircase needs non-negative thresholds")
        return SimpleOp(self.thresholds[::-1], self.levels[::-1])


# integral of piecewise-linear curves -------------------------------------------

def _linear_area(x0: float, v0: float, x1: float, v1: float, a: float, b: float) -> float:
    lo, hi = max(a, x0), min(b, x1)
    if hi <= lo:
        return 0.0
    slope = (v1 - v0) / (x1 - x0)
    va, vb = v0 + slope * (lo - x0), v0 + slope * (hi - x0)
    return 0.5 * (va + vb) * (hi - lo)


def _ray_area(x0: float, v0: float, slope: float, a: float, b: float, leftward: bool) -> float:
    """Area under the ray leaving ``(x0, v0)`` with value slope ``slope``, clipped to ``[a, b]``."""
    if leftward:
        lo, hi = a, min(b, x0)
    else:
        lo, hi = max(a, x0), b
    if hi <= lo:
        return 0.0
    if math.isinf(lo) or math.isinf(hi):
        far = -1.0 if leftward else 1.0
        if slope != 0.0:
            # values grow without bound in the direction of travel
            return INF if slope * far > 0 else -INF
        if v0 == 0.0:
            return 0.0
        return INF if v0 > 0 else -INF
    return 0.5 * ((v0 + slope * (lo - x0)) + (v0 + slope * (hi - x0))) * (hi - lo)


def _curve_integral(f: MonoCurve, a: float, b: float) -> float:
    if f.empty:
        raise BadParameter("cannot integrate the empty operator")
    D = domain(f)
    missing_left, missing_right = D.lo > a, D.hi < b
    if missing_left and missing_right:
        raise BadBounds("integration range overhangs the domain on both sides")
    if missing_left:
        return INF
    if missing_right:
        return -INF
    s = f.orientation.sign
    xs, vs = list(f.xs), [s * u for u in f.us]
    total = 0.0
    parts = []
    for k in range(len(xs) - 1):
        if xs[k + 1] > xs[k]:
            parts.append(_linear_area(xs[k], vs[k], xs[k + 1], vs[k + 1], a, b))
    for ray, x0, v0, leftward in ((f.left_ray, xs[0], vs[0], True),
                                  (f.right_ray, xs[-1], vs[-1], False)):
        if ray is None or ray == VERTICAL:
            continue
        parts.append(_ray_area(x0, v0, s * ray[1] / ray[0], a, b, leftward))
    if INF in parts and -INF in parts:
        raise BadBounds("integral diverges to both infinities")
    for p in parts:
        total += p
    return total


# analytic operands ---------------------------------------------------------------

def _selection(f):
    lo, hi = f.lo if hasattr(f, "lo") else -INF, f.hi if hasattr(f, "hi") else INF

    def g(t):
        a, b = f.images(np.asarray([t], dtype=float))
        a, b = float(a[0]), float(b[0])
        if math.isinf(a):
            return b
        return a

    return g, lo, hi


def _quad(fn, a: float, b: float) -> float:
    val, _ = integrate.quad(fn, a, b, limit=400, epsabs=1e-13, epsrel=1e-12)
    return float(val)


def _analytic_integral(f, a: float, b: float) -> float:
    D = f.domain()
    if D.lo > a and D.hi < b:
        raise BadBounds("integration range overhangs the domain on both sides")
    if D.lo > a:
        return INF
    if D.hi < b:
        return -INF
    meta = getattr(f, "meta", {})
    if meta.get("family") == "exp_power" and a == 0.0 and b == INF:
        return _exp_power_moment(meta, 1.0)
    g, _, _ = _selection(f)
    return _quad(g, a, b)


def _exp_power_moment(meta: dict, q: float) -> float:
    K, c, p = meta["K"], meta["c"], meta["p"]
    # int_0^inf q t^(q-1) K exp(-c t^p) dt
    return K * q * special.gamma(q / p) / (p * c ** (q / p))


def integral(f, a: float = 0.0, b: float = INF) -> float:
    """Integral of a nonincreasing operator over ``[a, b]`` (extended reals)."""
    a, b = float(a), float(b)
    if a > b:
        raise BadBounds(f"lower bound {a} exceeds upper bound {b}")
    if isinstance(f, SimpleOp):
        return f.integral(a, b)
    if f.orientation is not Orientation.DOWN:
        raise OrientationMismatch("integrals are defined here for nonincreasing operators")
    if a == b:
        return 0.0
    if isinstance(f, MonoCurve):
        return _curve_integral(f, a, b)
    return _analytic_integral(f, a, b)


# moments -------------------------------------------------------------------------

def _require_prob(alpha) -> None:
    if alpha.orientation is not Orientation.DOWN:
        raise NotProbOp("a probabilistic operator is nonincreasing")
    if isinstance(alpha, MonoCurve):
        if alpha.empty or not check_maximal(alpha):
            raise NotProbOp("a probabilistic operator is maximal")
        D, R = domain(alpha), range_of(alpha)
    else:
        if not alpha.is_maximal():
            raise NotProbOp("a probabilistic operator is maximal")
        D, R = alpha.domain(), alpha.range()
    # a domain reaching below 0 is harmless: only the half-line is integrated
    if R.lo < 0:
        raise NotProbOp("range leaves the half-line")
    if R.hi < 1:
        raise NotProbOp("range does not reach up to 1")


def alpha_zero(alpha) -> float:
    """``min alpha(0)``; ``inf`` when 0 lies left of the domain."""
    lo, hi = alpha.images(np.asarray([0.0]))
    if math.isnan(lo[0]):
        return INF
    return float(lo[0])


def _power_segment(t0: float, t1: float, s0: float, s1: float, q: float) -> float:
    """``int (t(s))^q ds`` where ``t`` is linear from ``t0`` at ``s0`` to ``t1`` at ``s1``."""
    w = s1 - s0
    if w <= 0:
        return 0.0
    if t0 == t1:
        return w * t0 ** q
    m = (t1 - t0) / w
    return (t1 ** (q + 1) - t0 ** (q + 1)) / (m * (q + 1))


def _curve_moment(alpha: MonoCurve, q: float) -> float:
    a0 = alpha_zero(alpha)
    if math.isinf(a0):
        return INF
    inv = invert(alpha)
    D = domain(inv)
    if D.lo > 0:
        return INF
    s = inv.orientation.sign
    S, T = list(inv.xs), [s * u for u in inv.us]
    total = 0.0
    for k in range(len(S) - 1):
        lo, hi = max(S[k], 0.0), min(S[k + 1], a0)
        if hi <= lo:
            continue
        m = (T[k + 1] - T[k]) / (S[k + 1] - S[k])
        t_lo, t_hi = T[k] + m * (lo - S[k]), T[k] + m * (hi - S[k])
        total += _power_segment(max(t_lo, 0.0), max(t_hi, 0.0), lo, hi, q)
    # left ray of the inverse covers levels below its first vertex
    if S[0] > 0 and inv.left_ray not in (None, VERTICAL):
        slope = s * inv.left_ray[1] / inv.left_ray[0]
        if slope == 0.0:
            return INF if T[0] > 0 else total
        hi = min(S[0], a0)
        t_hi = T[0] + slope * (hi - S[0])
        t_lo = T[0] + slope * (0.0 - S[0])
        total += _power_segment(t_lo, t_hi, 0.0, hi, q)
    if S[-1] < a0 and inv.right_ray not in (None, VERTICAL):
        slope = s * inv.right_ray[1] / inv.right_ray[0]
        lo = max(S[-1], 0.0)
        t_lo = T[-1] + slope * (lo - S[-1])
        t_hi = T[-1] + slope * (a0 - S[-1])
        total += _power_segment(max(t_lo, 0.0), max(t_hi, 0.0), lo, a0, q)
    return total


def moment(alpha, q: float) -> float:
    """``q``-th moment: the integral of ``alpha`` composed with ``t -> t^(1/q)``."""
    q = float(q)
    if not q > 0:
        raise BadParameter("moment order must be positive")
    _require_prob(alpha)
    if isinstance(alpha, MonoCurve):
        return _curve_moment(alpha, q)
    meta = getattr(alpha, "meta", {})
    if meta.get("family") == "exp_power":
        return _exp_power_moment(meta, q)
    D = alpha.domain()
    if D.lo > 0:
        return INF
    g, _, _ = _selection(alpha)
    # substitute t = s^(1/q): int_0^inf alpha(s^(1/q)) ds = int q t^(q-1) alpha(t) dt
    return _quad(lambda t: q * t ** (q - 1.0) * g(t), 0.0, D.hi)


def check_holder(alpha, q: float, p: float) -> bool:
    """Compare the ``q``-th and ``p``-th moment norms (``q < p``) with the ``alpha(0)`` weight."""
    if not 0 < q < p:
        raise BadParameter("need 0 < q < p")
    Mq, Mp = moment(alpha, q), moment(alpha, p)
    if math.isinf(Mp):
        return True
    if math.isinf(Mq):
        return False
    a0 = alpha_zero(alpha)
    lhs = Mq ** (1.0 / q)
    rhs = a0 ** ((p - q) / (p * q)) * Mp ** (1.0 / p)
    return lhs <= rhs * (1.0 + 1e-12) + 1e-15
