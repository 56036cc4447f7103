"""Piecewise-linear monotone graphs on the real line.

A :class:`MonoCurve` stores the graph of a monotone set-valued operator as an
ordered polyline plus two unbounded rays.  Vertical pieces of the polyline are
set-valued images, horizontal pieces are flat stretches.  A missing ray means
the graph stops at the end vertex, which makes the operator non-maximal.

Internally every curve is handled in "up-normalised" coordinates ``(x, s*y)``
with ``s = +1`` for nondecreasing and ``s = -1`` for nonincreasing operators, so
that both coordinates are nondecreasing along the polyline.  Rays are stored
as travel directions ``(dx, dy) >= 0`` in those coordinates, scaled so that
``max(dx, dy) == 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import BadParameter, MonotonicityViolation, NotAResolvent, NotMaximal
from .intervals import INF, IntervalR

MERGE_TOL = 1e-12
EQ_TOL = 1e-9
DUP_TOL = 1e-15

Ray = tuple[float, float] | None
HORIZONTAL: tuple[float, float] = (1.0, 0.0)
VERTICAL: tuple[float, float] = (0.0, 1.0)


class Orientation(str, Enum):
    UP = "up"
    DOWN = "down"

    @property
    def sign(self) -> float:
        return 1.0 if self is Orientation.UP else -1.0

    def times(self, other: "Orientation") -> "Orientation":
        return Orientation.UP if self is other else Orientation.DOWN


def ray_from_slope(s: float) -> tuple[float, float]:
    """Travel direction for a ray of non-negative slope ``s`` (``inf`` = vertical)."""
    s = float(s)
    if s < 0 or math.isnan(s):
        raise BadParameter(f"ray slope must be non-negative, got {s}")
    if s == 0.0:
        return HORIZONTAL
    if math.isinf(s):
        return VERTICAL
    return (1.0, s) if s <= 1.0 else (1.0 / s, 1.0)


def _normalize_dir(dx: float, dy: float) -> tuple[float, float]:
    if dx < 0 or dy < 0 or (dx == 0 and dy == 0):
        raise BadParameter(f"invalid ray direction ({dx}, {dy})")
    m = max(dx, dy)
    return (dx / m, dy / m)


def ray_slope(r: Ray) -> float | None:
    if r is None:
        return None
    dx, dy = r
    return INF if dx == 0 else dy / dx


def _parse_ray(spec) -> Ray:
    if spec is None:
        return None
    if isinstance(spec, str):
        key = spec.lower()
        if key in ("none", "end"):
            return None
        if key == "horizontal":
            return HORIZONTAL
        if key == "vertical":
            return VERTICAL
        raise BadParameter(f"unknown ray kind {spec!r}")
    if isinstance(spec, dict):
        kind = spec.get("kind", "sloped")
        if kind == "sloped":
            return ray_from_slope(float(spec["slope"]))
        return _parse_ray(kind)
    if isinstance(spec, (tuple, list)):
        if len(spec) == 2 and isinstance(spec[0], str):
            return ray_from_slope(float(spec[1]))
        return _normalize_dir(float(spec[0]), float(spec[1]))
    return ray_from_slope(float(spec))


def _ray_json(r: Ray):
    if r is None:
        return {"kind": "none"}
    s = ray_slope(r)
    if s == 0:
        return {"kind": "horizontal"}
    if math.isinf(s):
        return {"kind": "vertical"}
    return {"kind": "sloped", "slope": s}


def _scale(*vals: float) -> float:
    return max([1.0] + [abs(v) for v in vals if math.isfinite(v)])


def _collinear(d1: tuple[float, float], d2: tuple[float, float], tol: float = MERGE_TOL) -> bool:
    n1 = math.hypot(*d1)
    n2 = math.hypot(*d2)
    if n1 == 0 or n2 == 0:
        return False
    cross = d1[0] * d2[1] - d1[1] * d2[0]
    dot = d1[0] * d2[0] + d1[1] * d2[1]
    return abs(cross) <= tol * n1 * n2 and dot > 0


@dataclass(frozen=True, eq=False)
class MonoCurve:
    """Canonical piecewise-linear monotone graph.  Build with :func:`build_curve`."""

    orientation: Orientation
    xs: tuple[float, ...] = ()
    us: tuple[float, ...] = ()  # up-normalised ordinates
    left_ray: Ray = None
    right_ray: Ray = None
    empty: bool = False
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    # basic views --------------------------------------------------------
    @cached_property
    def X(self) -> np.ndarray:
        return np.asarray(self.xs, dtype=float)

    @cached_property
    def U(self) -> np.ndarray:
        return np.asarray(self.us, dtype=float)

    @property
    def ys(self) -> tuple[float, ...]:
        s = self.orientation.sign
        return tuple(s * u + 0.0 for u in self.us)

    @property
    def vertices(self) -> list[tuple[float, float]]:
        return list(zip(self.xs, self.ys))

    @property
    def is_maximal(self) -> bool:
        return check_maximal(self)

    def __repr__(self) -> str:
        if self.empty:
            return f"MonoCurve({self.orientation.value}, empty)"
        return (
            f"MonoCurve({self.orientation.value}, vertices={self.vertices}, "
            f"left={_ray_json(self.left_ray)}, right={_ray_json(self.right_ray)})"
        )

    # evaluation ---------------------------------------------------------
    def images_up(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Up-normalised image bounds at each ``x``; NaN marks an empty image."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lo = np.full(x.shape, np.nan)
        hi = np.full(x.shape, np.nan)
        if self.empty:
            return lo, hi
        X, U = self.X, self.U
        n = len(X)
        i1 = np.searchsorted(X, x, side="left")
        i2 = np.searchsorted(X, x, side="right")
        at_vertex = i2 > i1
        if at_vertex.any():
            lo[at_vertex] = U[i1[at_vertex]]
            hi[at_vertex] = U[i2[at_vertex] - 1]
            if self.left_ray is not None and self.left_ray[0] == 0.0:
                lo[at_vertex & (i1 == 0)] = -INF
            if self.right_ray is not None and self.right_ray[0] == 0.0:
                hi[at_vertex & (i2 == n)] = INF
        inner = (~at_vertex) & (i1 > 0) & (i1 < n)
        if inner.any():
            k = i1[inner]
            x0, x1 = X[k - 1], X[k]
            u0, u1 = U[k - 1], U[k]
            t = (x[inner] - x0) / (x1 - x0)
            val = u0 + (u1 - u0) * t
            lo[inner] = val
            hi[inner] = val
        left = (~at_vertex) & (i1 == 0)
        if left.any() and self.left_ray is not None and self.left_ray[0] > 0:
            dx, dy = self.left_ray
            val = U[0] - (dy / dx) * (X[0] - x[left]) if dy > 0 else np.full(left.sum(), U[0])
            lo[left] = val
            hi[left] = val
        right = (~at_vertex) & (i1 == n)
        if right.any() and self.right_ray is not None and self.right_ray[0] > 0:
            dx, dy = self.right_ray
            val = U[-1] + (dy / dx) * (x[right] - X[-1]) if dy > 0 else np.full(right.sum(), U[-1])
            lo[right] = val
            hi[right] = val
        return lo, hi

    def images(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Actual image bounds ``(lo, hi)`` at each ``x``; NaN marks an empty image."""
        lo, hi = self.images_up(x)
        if self.orientation is Orientation.UP:
            return lo, hi
        return 0.0 - hi, 0.0 - lo

    def __call__(self, x: float) -> IntervalR:
        return eval_at(self, x)

    def domain(self) -> IntervalR:
        return domain(self)

    def range(self) -> IntervalR:
        return range_of(self)

    def inverse(self) -> "MonoCurve":
        return invert(self)

    def to_json(self) -> dict:
        return curve_to_json(self)


# construction ---------------------------------------------------------------

def empty_curve(orientation: Orientation = Orientation.UP) -> MonoCurve:
    return MonoCurve(Orientation(orientation), empty=True)


def build_curve(
    orientation,
    vertices: Iterable[Sequence[float]],
    left_ray=None,
    right_ray=None,
) -> MonoCurve:
    """Validate and canonicalise a monotone polyline.

    ``vertices`` are actual ``(x, y)`` points ordered along the graph.  Rays are
    given as ``None``/``"none"``, ``"horizontal"``, ``"vertical"``, a
    non-negative slope magnitude, or ``{"kind": ..., "slope": ...}``.
    """
    orientation = Orientation(orientation)
    pts = [(float(x), float(y)) for x, y in vertices]
    lr, rr = _parse_ray(left_ray), _parse_ray(right_ray)
    if not pts:
        if lr is not None or rr is not None:
            raise BadParameter("a curve with rays needs at least one vertex")
        return empty_curve(orientation)
    s = orientation.sign
    X = [p[0] for p in pts]
    U = [s * p[1] for p in pts]
    for k in range(len(pts) - 1):
        dx = X[k + 1] - X[k]
        du = U[k + 1] - U[k]
        tol = MERGE_TOL * _scale(X[k], X[k + 1], U[k], U[k + 1])
        if dx < -tol or du < -tol:
            raise MonotonicityViolation(
                f"vertices {pts[k]} -> {pts[k + 1]} are not co-monotone for orientation {orientation.value}"
            )
    return _from_up(orientation, X, U, lr, rr)


def _from_up(orientation: Orientation, X, U, lr: Ray, rr: Ray) -> MonoCurve:
    """Canonicalise up-normalised points (assumed co-monotone up to round-off)."""
    X = list(np.maximum.accumulate(np.asarray(X, dtype=float)))
    U = list(np.maximum.accumulate(np.asarray(U, dtype=float)))
    if any(not math.isfinite(v) for v in X + U):
        raise BadParameter("vertex coordinates must be finite")
    pts: list[tuple[float, float]] = []
    for p in zip(X, U):
        if pts:
            q = pts[-1]
            tol = DUP_TOL * _scale(*p, *q)
            if abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol:
                continue
        pts.append(p)
    out: list[tuple[float, float]] = []
    for p in pts:
        while len(out) >= 2 and _collinear(_diff(out[-2], out[-1]), _diff(out[-1], p)):
            out.pop()
        out.append(p)
    while lr is not None and len(out) >= 2 and _collinear(lr, _diff(out[0], out[1])):
        out.pop(0)
    while rr is not None and len(out) >= 2 and _collinear(_diff(out[-2], out[-1]), rr):
        out.pop()
    if len(out) == 1 and lr is not None and rr is not None and _collinear(lr, rr):
        out = [_minty_anchor(out[0], lr)]
    return MonoCurve(
        orientation,
        tuple(float(p[0]) + 0.0 for p in out),
        tuple(float(p[1]) + 0.0 for p in out),
        lr,
        rr,
    )


def _diff(p, q) -> tuple[float, float]:
    return (q[0] - p[0], q[1] - p[1])


def _minty_anchor(p: tuple[float, float], d: tuple[float, float]) -> tuple[float, float]:
    """Point of the line through ``p`` with direction ``d`` where ``x + u = 0``."""
    x0, u0 = p
    t = -(x0 + u0) / (d[0] + d[1])
    x, u = x0 + t * d[0], u0 + t * d[1]
    if d[0] == 0.0:
        x, u = x0, -x0
    elif d[1] == 0.0:
        x, u = -u0, u0
    return (x + 0.0, u + 0.0)


# queries --------------------------------------------------------------------

def eval_at(f: MonoCurve, x: float) -> IntervalR:
    """Image ``f(x)`` as a closed interval (empty outside the domain)."""
    lo, hi = f.images(np.array([float(x)]))
    if math.isnan(lo[0]):
        return IntervalR.empty()
    return IntervalR.make(lo[0], hi[0])


def domain(f: MonoCurve) -> IntervalR:
    if f.empty:
        return IntervalR.empty()
    lr, rr = f.left_ray, f.right_ray
    lo = f.xs[0] if (lr is None or lr[0] == 0.0) else -INF
    hi = f.xs[-1] if (rr is None or rr[0] == 0.0) else INF
    return IntervalR.make(lo, hi)


def range_of(f: MonoCurve) -> IntervalR:
    if f.empty:
        return IntervalR.empty()
    lr, rr = f.left_ray, f.right_ray
    lo = f.us[0] if (lr is None or lr[1] == 0.0) else -INF
    hi = f.us[-1] if (rr is None or rr[1] == 0.0) else INF
    r = IntervalR.make(lo, hi)
    return r if f.orientation is Orientation.UP else -r


def check_maximal(f: MonoCurve) -> bool:
    """Domain/range criterion: ``dom + ran = R`` (nondecreasing) or ``ran - dom = R``."""
    if f.empty:
        return False
    d, r = domain(f), range_of(f)
    total = d + r if f.orientation is Orientation.UP else r + (-d)
    return total.lo == -INF and total.hi == INF


def minty_check(f: MonoCurve) -> bool:
    """Minty criterion: the resolvent shear of the graph projects onto all of R."""
    if f.empty:
        return False
    ends_open = [f.left_ray, f.right_ray]
    # The polyline is connected, so the projection x+u is an interval whose
    # ends are unbounded exactly when the corresponding ray exists.
    return all(r is not None and (r[0] + r[1]) > 0 for r in ends_open)


# inversion, restriction -----------------------------------------------------

def invert(f: MonoCurve) -> MonoCurve:
    """Graph swap ``(x, y) -> (y, x)``; orientation is preserved."""
    if f.empty:
        return f
    swap = lambda r: None if r is None else (r[1], r[0])  # noqa: E731
    if f.orientation is Orientation.UP:
        return MonoCurve(f.orientation, f.us, f.xs, swap(f.left_ray), swap(f.right_ray))
    xs = tuple(-u for u in reversed(f.us))
    us = tuple(-x for x in reversed(f.xs))
    # new x = old y = -u; new up-normalised ordinate = -(old x)
    return MonoCurve(f.orientation, tuple(x + 0.0 for x in xs), tuple(u + 0.0 for u in us),
                     swap(f.right_ray), swap(f.left_ray))


def restrict_to(f: MonoCurve, A: IntervalR) -> MonoCurve:
    """Maximal restriction to the closure of ``A``.

    Inside ``A`` the graph is unchanged.  At a boundary point cut strictly
    inside the domain the image is completed by a vertical ray, pointing down
    (up-normalised) on the left end and up on the right end.
    """
    if f.empty or A.is_empty:
        return empty_curve(f.orientation)
    D = domain(f)
    closure = IntervalR.make(A.lo, A.hi)
    inter = closure.intersect(D)
    if inter.is_empty:
        return empty_curve(f.orientation)
    a, b = inter.lo, inter.hi
    if a == b:
        return _from_up(f.orientation, [a], [0.0], VERTICAL, VERTICAL)
    X, U = list(f.xs), list(f.us)
    lr, rr = f.left_ray, f.right_ray
    pts = list(zip(X, U))
    if a > D.lo:
        _, hi_a = f.images_up(np.array([a]))
        pts = [(a, float(hi_a[0]))] + [p for p in pts if p[0] > a]
        lr = VERTICAL
    if b < D.hi:
        lo_b, _ = f.images_up(np.array([b]))
        pts = [p for p in pts if p[0] < b] + [(b, float(lo_b[0]))]
        rr = VERTICAL
    return _from_up(f.orientation, [p[0] for p in pts], [p[1] for p in pts], lr, rr)


# resolvents -----------------------------------------------------------------

def resolvent_of(f: MonoCurve) -> MonoCurve:
    """Resolvent as a single-valued nondecreasing 1-Lipschitz curve.

    Computed as the shear ``(x, u) -> (x + u, x)`` of the up-normalised graph,
    i.e. ``(x, y) -> (x + y, x)`` for nondecreasing and ``(x - y, x)`` for
    nonincreasing operators.
    """
    if not check_maximal(f):
        raise NotMaximal("resolvent requires a maximally monotone operator")
    X, U = f.X, f.U
    shear = lambda r: _normalize_dir(r[0] + r[1], r[0])  # noqa: E731
    return _from_up(Orientation.UP, list(X + U), list(X), shear(f.left_ray), shear(f.right_ray))


def from_resolvent(J: MonoCurve, orientation) -> MonoCurve:
    """Unique maximal operator of the given orientation with resolvent ``J``."""
    orientation = Orientation(orientation)
    if J.empty or J.orientation is not Orientation.UP or not check_maximal(J):
        raise NotAResolvent("a resolvent is a nondecreasing curve with domain R")
    X, U = J.X, J.U
    dX, dU = np.diff(X), np.diff(U)
    tol = MERGE_TOL * max(1.0, float(np.max(np.abs(np.concatenate([X, U]))))) * 10
    if np.any(dU > dX + tol) or np.any(dX <= 0):
        raise NotAResolvent("resolvent segments must have slope in [0, 1]")
    for r in (J.left_ray, J.right_ray):
        if r[0] == 0.0 or r[1] > r[0] * (1 + 1e-12):
            raise NotAResolvent("resolvent rays must have slope in [0, 1] and domain R")
    unshear = lambda r: _normalize_dir(r[1], max(r[0] - r[1], 0.0))  # noqa: E731
    return _from_up(orientation, list(U), list(X - U), unshear(J.left_ray), unshear(J.right_ray))


def resolvent_values(f: MonoCurve, u) -> np.ndarray:
    """Evaluate ``J_f`` at the points ``u``."""
    lo, _ = resolvent_of(f).images_up(u)
    return lo


def minty_param(f: MonoCurve, x: float) -> tuple[float, float]:
    """Point of the graph attached to parameter ``x`` by the resolvent."""
    j = float(resolvent_values(f, np.array([float(x)]))[0])
    if f.orientation is Orientation.UP:
        return (j, float(x) - j)
    return (j, j - float(x))


# piecewise-linear functions (resolvents) -----------------------------------

@dataclass(frozen=True)
class PLFunction:
    """Single-valued piecewise-linear function on R with linear ends."""

    knots: np.ndarray
    values: np.ndarray
    left_slope: float
    right_slope: float

    @staticmethod
    def of_curve(g: MonoCurve) -> "PLFunction":
        lr, rr = g.left_ray, g.right_ray
        return PLFunction(g.X.copy(), g.U.copy(), lr[1] / lr[0], rr[1] / rr[0])

    def __call__(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        k, v = self.knots, self.values
        out = np.interp(u, k, v)
        left = u < k[0]
        right = u > k[-1]
        out[left] = v[0] - self.left_slope * (k[0] - u[left])
        out[right] = v[-1] + self.right_slope * (u[right] - k[-1])
        return out

    def to_curve(self) -> MonoCurve:
        return _from_up(
            Orientation.UP,
            list(self.knots),
            list(self.values),
            ray_from_slope(self.left_slope),
            ray_from_slope(self.right_slope),
        )


def resolvent_function(f: MonoCurve) -> PLFunction:
    return PLFunction.of_curve(resolvent_of(f))


def pointwise_extremum(funcs: Sequence[PLFunction], take_max: bool) -> PLFunction:
    """Exact pointwise max (or min) of piecewise-linear functions."""
    knots = np.unique(np.concatenate([p.knots for p in funcs]))
    cand = [knots]
    edges = np.concatenate([[knots[0] - 1.0], knots, [knots[-1] + 1.0]])
    for i in range(len(funcs)):
        for j in range(i + 1, len(funcs)):
            vi, vj = funcs[i](edges), funcs[j](edges)
            d = vi - vj
            for k in range(len(edges) - 1):
                if d[k] * d[k + 1] < 0:
                    t = d[k] / (d[k] - d[k + 1])
                    cand.append(np.array([edges[k] + t * (edges[k + 1] - edges[k])]))
            # crossings on the unbounded ends
            sl = funcs[i].left_slope - funcs[j].left_slope
            if sl != 0:
                u = edges[1] - d[1] / sl
                if u < edges[1]:
                    cand.append(np.array([u]))
            sr = funcs[i].right_slope - funcs[j].right_slope
            if sr != 0:
                u = edges[-2] - d[-2] / sr
                if u > edges[-2]:
                    cand.append(np.array([u]))
    pts = np.unique(np.concatenate(cand))
    vals = np.stack([p(pts) for p in funcs])
    agg = vals.max(axis=0) if take_max else vals.min(axis=0)
    probe_l = np.stack([p(pts[:1] - 1.0) for p in funcs])[:, 0]
    probe_r = np.stack([p(pts[-1:] + 1.0) for p in funcs])[:, 0]
    il = int(np.argmax(probe_l) if take_max else np.argmin(probe_l))
    ir = int(np.argmax(probe_r) if take_max else np.argmin(probe_r))
    return PLFunction(pts, agg, funcs[il].left_slope, funcs[ir].right_slope)


def _close(a: float, b: float, tol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def curves_equal(f: MonoCurve, g: MonoCurve, tol: float = EQ_TOL) -> bool:
    """Equality of canonical curves within a mixed absolute/relative tolerance.

    Maximal curves are compared through their resolvents on the union of
    breakpoints and through the slopes of the end rays, which is insensitive
    to how nearly-collinear vertices were merged.
    """
    if f.orientation is not g.orientation:
        return False
    if f.empty or g.empty:
        return f.empty and g.empty
    if check_maximal(f) and check_maximal(g):
        Jf, Jg = resolvent_function(f), resolvent_function(g)
        pts = np.unique(np.concatenate([Jf.knots, Jg.knots]))
        a, b = Jf(pts), Jg(pts)
        if not all(_close(x, y, tol) for x, y in zip(a, b)):
            return False
        return (abs(Jf.left_slope - Jg.left_slope) <= tol
                and abs(Jf.right_slope - Jg.right_slope) <= tol)
    if len(f.xs) != len(g.xs):
        return False
    for a, b in zip(f.xs + f.us, g.xs + g.us):
        if not _close(a, b, tol):
            return False
    for r, s in ((f.left_ray, g.left_ray), (f.right_ray, g.right_ray)):
        if (r is None) != (s is None):
            return False
        if r is not None and abs(r[0] * s[1] - r[1] * s[0]) > tol:
            return False
    return True


# serialisation --------------------------------------------------------------

def curve_to_json(f: MonoCurve) -> dict:
    if f.empty:
        return {"orientation": f.orientation.value, "vertices": [], "left_ray": {"kind": "none"},
                "right_ray": {"kind": "none"}, "empty": True}
    return {
        "orientation": f.orientation.value,
        "vertices": [[x, y] for x, y in f.vertices],
        "left_ray": _ray_json(f.left_ray),
        "right_ray": _ray_json(f.right_ray),
    }


def curve_from_json(obj: dict) -> MonoCurve:
    return build_curve(
        obj["orientation"],
        obj.get("vertices", []),
        obj.get("left_ray"),
        obj.get("right_ray"),
    )
