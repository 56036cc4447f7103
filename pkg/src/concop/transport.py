"""One-dimensional quantile transports and the ``(log t)^a t^b`` family.

All four reference laws are symmetric, so every map is built on the upper
half-line through the tail ``P(X > t)`` and extended by oddness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

from .errors import BadParameter, OutOfDomain, OutOfSupport, ZeroDensity

Arr = np.ndarray


@dataclass(frozen=True)
class DensitySpec:
    """A symmetric law on the real line given by its density and upper tail."""

    name: str
    q: float | None
    logpdf: Callable[[Arr], Arr]
    tail: Callable[[Arr], Arr]  # P(X > t) for t >= 0
    tail_inverse: Callable[[Arr], Arr] | None = None  # inverse of tail on (0, 1/2]
    sampler: Callable[[np.random.Generator, int], Arr] | None = None

    def pdf(self, t) -> Arr:
        return np.exp(self.logpdf(np.asarray(t, dtype=float)))

    def survival(self, t) -> Arr:
        """``P(X > t)`` on the whole line."""
        t = np.asarray(t, dtype=float)
        upper = self.tail(np.abs(t))
        return np.where(t >= 0, upper, 1.0 - upper)

    def tail_quantile(self, p) -> Arr:
        """Point ``t >= 0`` with ``P(X > t) = p`` for ``p`` in ``(0, 1/2]``."""
        p = np.asarray(p, dtype=float)
        if self.tail_inverse is not None:
            return self.tail_inverse(p)
        return _bisect_decreasing(self.tail, p)

    def sample(self, rng: np.random.Generator, size: int) -> Arr:
        if self.sampler is not None:
            return self.sampler(rng, size)
        # transport from Laplace draws
        return quantile_transport(laplace(), self, laplace().sample(rng, size))


def _bisect_decreasing(fn, p: Arr, iters: int = 200) -> Arr:
    p = np.atleast_1d(p).astype(float)
    lo = np.zeros_like(p)
    hi = np.ones_like(p)
    for _ in range(2000):
        grow = fn(hi) > p
        if not grow.any():
            break
        hi = np.where(grow, hi * 2.0, hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = fn(mid) > p
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


def gaussian() -> DensitySpec:
    return DensitySpec(
        "gaussian", None,
        lambda t: -0.5 * t * t - 0.5 * math.log(2 * math.pi),
        lambda t: special.ndtr(-t),
        lambda p: -special.ndtri(p),
        lambda rng, n: rng.standard_normal(n),
    )


def laplace() -> DensitySpec:
    return DensitySpec(
        "laplace", 1.0,
        lambda t: -np.abs(t) - math.log(2.0),
        lambda t: 0.5 * np.exp(-t),
        lambda p: -np.log(2.0 * p),
        lambda rng, n: rng.laplace(0.0, 1.0, n),
    )


def subexp(q: float) -> DensitySpec:
    """Density ``q / (2 Gamma(1/q)) exp(-|t|^q)``."""
    if not q > 0:
        raise BadParameter("shape must be positive")
    if q == 1:
        return laplace()
    log_norm = math.log(q / (2.0 * math.gamma(1.0 / q)))
    return DensitySpec(
        f"subexp({q:g})", q,
        lambda t: log_norm - np.power(np.abs(t), q),
        # P(X > t) = Gamma(1/q, t^q) / (2 Gamma(1/q))
        lambda t: 0.5 * special.gammaincc(1.0 / q, np.power(t, q)),
        lambda p: np.power(special.gammainccinv(1.0 / q, 2.0 * p), 1.0 / q),
    )


def cauchy(q: float) -> DensitySpec:
    """Density ``(q/2)(1 + |t|)^-(q+1)``."""
    if not q > 0:
        raise BadParameter("shape must be positive")
    return DensitySpec(
        f"cauchy({q:g})", q,
        lambda t: math.log(q / 2.0) - (q + 1.0) * np.log1p(np.abs(t)),
        lambda t: 0.5 * np.power(1.0 + t, -q),
        lambda p: np.power(2.0 * p, -1.0 / q) - 1.0,
        lambda rng, n: _symmetric_draw(rng, n, lambda p: np.power(2.0 * p, -1.0 / q) - 1.0),
    )


def _symmetric_draw(rng: np.random.Generator, n: int, tail_inverse) -> Arr:
    """Random sign times the tail quantile of a uniform level in ``(0, 1/2]``."""
    u = 0.5 * (1.0 - rng.random(n))
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return sign * tail_inverse(u)


def density(name: str, q: float | None = None) -> DensitySpec:
    key = name.lower()
    if key in ("gaussian", "normal", "gamma"):
        return gaussian()
    if key == "laplace":
        return laplace()
    if key in ("subexp", "nu"):
        if q is None:
            raise BadParameter("subexp needs a shape q")
        return subexp(q)
    if key in ("cauchy", "kappa"):
        if q is None:
            raise BadParameter("cauchy needs a shape q")
        return cauchy(q)
    raise BadParameter(f"unknown law {name!r}")


# transports ------------------------------------------------------------------------

def quantile_transport(source: DensitySpec, target: DensitySpec, t):
    """Monotone map pushing ``source`` onto ``target``: tail inverse of target after tail of source."""
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise OutOfSupport("transport is defined at finite points only")
    a = np.abs(arr)
    p = source.tail(a)
    with np.errstate(divide="ignore", over="ignore"):
        mapped = target.tail_quantile(np.maximum(p, 0.0))
    mapped = np.where(p >= 0.5, 0.0, mapped)
    out = np.sign(arr) * mapped
    return float(out) if np.ndim(t) == 0 else out


def transport_derivative(source: DensitySpec, target: DensitySpec, t):
    """``f_source(t) / f_target(phi(t))``, computed in log space."""
    arr = np.asarray(t, dtype=float)
    phi = np.asarray(quantile_transport(source, target, arr), dtype=float)
    if not np.all(np.isfinite(phi)):
        raise ZeroDensity("transport escapes to infinity; the target density vanishes there")
    log_ratio = source.logpdf(arr) - target.logpdf(phi)
    if not np.all(np.isfinite(target.logpdf(phi))):
        raise ZeroDensity("target density is zero at the transported point")
    with np.errstate(over="ignore"):
        out = np.exp(log_ratio)
    return float(out) if np.ndim(t) == 0 else out


def log_transport_derivative(source: DensitySpec, target: DensitySpec, t) -> Arr:
    arr = np.asarray(t, dtype=float)
    phi = np.asarray(quantile_transport(source, target, arr), dtype=float)
    return source.logpdf(arr) - target.logpdf(phi)


# derivative bounds -----------------------------------------------------------------

GRID_T = 30.0
GRID_N = 10_000
_PAD = 1e-6


class SubexpBound(NamedTuple):
    h: Callable[[Arr], Arr]
    h0: float
    C: float


class CauchyBound(NamedTuple):
    h: Callable[[Arr], Arr]
    C: float


def _grid(t0: float = 0.0, T: float = GRID_T, n: int = GRID_N) -> Arr:
    return np.linspace(t0, T, n)


def h_bound_subexp(q: float, source: str = "gaussian", t0: float = 1.0) -> SubexpBound:
    """``h(t) = max(h0, C t^e)`` dominating the transport derivative onto ``subexp(q)``.

    ``e = 2/q - 1`` from a Gaussian source and ``1/q - 1`` from a Laplace one.
    """
    if not 0 < q < 1:
        raise BadParameter("shape must lie in (0, 1)")
    src = density(source)
    expo = (2.0 / q - 1.0) if src.name == "gaussian" else (1.0 / q - 1.0)
    tgt = subexp(q)
    head = _grid(0.0, t0, 2000)
    tail = _grid(t0, GRID_T)
    h0 = float(np.max(transport_derivative(src, tgt, head))) * (1 + _PAD)
    log_ratio = log_transport_derivative(src, tgt, tail) - expo * np.log(tail)
    C = float(np.exp(np.max(log_ratio))) * (1 + _PAD)

    def h(t):
        t = np.asarray(t, dtype=float)
        return np.maximum(h0, C * np.power(np.maximum(t, 0.0), expo))

    h.exponent = expo  # type: ignore[attr-defined]
    return SubexpBound(h, h0, C)


def h_bound_cauchy(q: float, source: str = "laplace", t0: float = 1.0) -> CauchyBound:
    """Growth bound for the transport derivative onto ``cauchy(q)``.

    Laplace source: ``h(t) = C e^{t/q}`` with ``C >= 1`` (so ``h`` is
    submultiplicative).  Gaussian source: ``h(t) = max(h0, C t^{1+1/q} e^{t^2/(2q)})``.
    """
    if not q > 0:
        raise BadParameter("shape must be positive")
    src = density(source)
    tgt = cauchy(q)
    if src.name == "laplace":
        grid = _grid()
        log_ratio = log_transport_derivative(src, tgt, grid) - grid / q
        C = max(1.0, float(np.exp(np.max(log_ratio))) * (1 + _PAD))

        def h(t):
            with np.errstate(over="ignore"):
                return C * np.exp(np.asarray(t, dtype=float) / q)

        h.h0 = C  # type: ignore[attr-defined]
        return CauchyBound(h, C)
    head = _grid(0.0, t0, 2000)
    tail = _grid(t0, GRID_T)
    h0 = float(np.max(transport_derivative(src, tgt, head))) * (1 + _PAD)
    log_growth = (1.0 + 1.0 / q) * np.log(tail) + tail * tail / (2.0 * q)
    C = float(np.exp(np.max(log_transport_derivative(src, tgt, tail) - log_growth))) * (1 + _PAD)

    def h(t):
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        with np.errstate(over="ignore", divide="ignore"):
            growth = C * np.power(t, 1.0 + 1.0 / q) * np.exp(t * t / (2.0 * q))
        return np.maximum(h0, growth)

    h.h0 = h0  # type: ignore[attr-defined]
    return CauchyBound(h, C)


def exp_envelope_constants(q: float, T: float = GRID_T, n: int = GRID_N) -> tuple[float, float]:
    """Extremes of ``S(t) / ((t+1)^{1-q} e^{-t^q})`` over ``[0, T]`` for ``subexp(q)``."""
    t = _grid(0.0, T, n)
    S = subexp(q)
    # log of the tail through the regularized upper gamma, stable deep in the tail
    log_tail = np.log(S.tail(t))
    log_ratio = log_tail - ((1.0 - q) * np.log1p(t) - np.power(t, q))
    return float(np.exp(log_ratio.min())), float(np.exp(log_ratio.max()))


# the (log t)^a t^b family ---------------------------------------------------------------

def H_ab_eval(a: float, b: float, t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 1):
        raise OutOfDomain("H is defined on [1, inf)")
    with np.errstate(divide="ignore"):
        out = np.power(np.log(arr), a) * np.power(arr, b)
    return float(out) if np.ndim(t) == 0 else out


def H_ab_inverse(a: float, b: float, u):
    """Inverse of ``t -> (log t)^a t^b`` on ``[1, inf)`` for ``a, b > 0``.

    Solved for ``s = log t`` by bisection on ``a log s + b s = log u``.
    """
    if not (a > 0 and b > 0):
        raise OutOfDomain("the inverse needs a, b > 0")
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(arr < 0):
        raise OutOfDomain("H takes values in [0, inf)")
    out = np.ones_like(arr)
    pos = arr > 0
    if pos.any():
        target = np.log(arr[pos])
        lo = np.zeros_like(target)
        hi = np.maximum(1.0, target / b + 1.0)
        # make sure the bracket holds: g(hi) >= target
        for _ in range(200):
            short = a * np.log(hi) + b * hi < target
            if not short.any():
                break
            hi = np.where(short, 2.0 * hi, hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            with np.errstate(divide="ignore"):
                below = a * np.log(mid) + b * mid < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out[pos] = np.exp(0.5 * (lo + hi))
    return float(out[0]) if np.ndim(u) == 0 else out


def H_ab_inverse_lower(a: float, b: float, u):
    """Closed-form lower bound ``b^{a/b} (log u)^{-a/b} u^{1/b}``, valid for ``u >= e^b``."""
    if not (a > 0 and b > 0):
        raise OutOfDomain("the bound needs a, b > 0")
    arr = np.asarray(u, dtype=float)
    if np.any(arr < math.exp(b) * (1 - 1e-15)):
        raise OutOfDomain("the bound holds for u >= e^b")
    out = b ** (a / b) * np.power(np.log(arr), -a / b) * np.power(arr, 1.0 / b)
    return float(out) if np.ndim(u) == 0 else out


def invert_increasing(fn: Callable[[Arr], Arr], y, lo: float = 0.0, iters: int = 200) -> Arr:
    """Vectorised inverse of an increasing map on ``[lo, inf)`` by bracketing and bisection."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    a = np.full_like(y, lo)
    b = np.full_like(y, max(1.0, lo + 1.0))
    for _ in range(2000):
        short = fn(b) < y
        if not short.any():
            break
        b = np.where(short, b * 2.0, b)
    for _ in range(iters):
        m = 0.5 * (a + b)
        below = fn(m) < y
        a = np.where(below, m, a)
        b = np.where(below, b, m)
    return 0.5 * (a + b)
