"""Extended reals and sub-intervals of the real line.

Infinite values are plain ``math.inf`` floats.  Intervals carry open/closed
flags so that domains such as ``(0, inf)`` and images such as ``[1, inf)`` are
represented faithfully.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

INF = math.inf


def ext_add(a: float, b: float) -> float:
    """Extended-real addition; ``inf - inf`` is rejected."""
    if math.isinf(a) and math.isinf(b) and (a > 0) != (b > 0):
        raise ValueError("inf - inf is undefined")
    return a + b


def ext_mul_nonneg(a: float, b: float) -> float:
    """Product of two non-negative extended reals with ``0 * inf = 0``."""
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


@dataclass(frozen=True)
class IntervalR:
    """Interval of the extended real line.

    The empty interval is the distinguished value ``IntervalR.empty()``.
    Infinite endpoints are always open.
    """

    lo: float = 0.0
    hi: float = -1.0
    lo_closed: bool = True
    hi_closed: bool = True
    is_empty: bool = True

    def __post_init__(self):
        if self.is_empty:
            return
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("NaN endpoint")
        if self.lo > self.hi:
            raise ValueError(f"lo > hi in interval ({self.lo}, {self.hi})")
        if math.isinf(self.lo) and self.lo_closed:
            object.__setattr__(self, "lo_closed", False)
        if math.isinf(self.hi) and self.hi_closed:
            object.__setattr__(self, "hi_closed", False)
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            object.__setattr__(self, "is_empty", True)

    # constructors -------------------------------------------------------
    @staticmethod
    def empty() -> "IntervalR":
        return IntervalR()

    @staticmethod
    def make(lo: float, hi: float, lo_closed: bool = True, hi_closed: bool = True) -> "IntervalR":
        if lo > hi:
            return IntervalR.empty()
        return IntervalR(float(lo), float(hi), lo_closed, hi_closed, False)

    @staticmethod
    def closed(lo: float, hi: float) -> "IntervalR":
        return IntervalR.make(lo, hi, True, True)

    @staticmethod
    def point(x: float) -> "IntervalR":
        return IntervalR.make(x, x)

    @staticmethod
    def real_line() -> "IntervalR":
        return IntervalR.make(-INF, INF, False, False)

    # predicates ---------------------------------------------------------
    def contains(self, x: float) -> bool:
        if self.is_empty:
            return False
        above = x > self.lo or (x == self.lo and self.lo_closed)
        below = x < self.hi or (x == self.hi and self.hi_closed)
        return above and below

    def is_point(self) -> bool:
        return not self.is_empty and self.lo == self.hi

    def is_bounded(self) -> bool:
        return not self.is_empty and math.isfinite(self.lo) and math.isfinite(self.hi)

    def approx_equal(self, other: "IntervalR", tol: float = 1e-9) -> bool:
        if self.is_empty or other.is_empty:
            return self.is_empty and other.is_empty
        return _close(self.lo, other.lo, tol) and _close(self.hi, other.hi, tol)

    # set operations -----------------------------------------------------
    def intersect(self, other: "IntervalR") -> "IntervalR":
        if self.is_empty or other.is_empty:
            return IntervalR.empty()
        if self.lo > other.lo:
            lo, lc = self.lo, self.lo_closed
        elif self.lo < other.lo:
            lo, lc = other.lo, other.lo_closed
        else:
            lo, lc = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hc = self.hi, self.hi_closed
        elif self.hi > other.hi:
            hi, hc = other.hi, other.hi_closed
        else:
            hi, hc = self.hi, self.hi_closed and other.hi_closed
        return IntervalR.make(lo, hi, lc, hc)

    def __add__(self, other: "IntervalR") -> "IntervalR":
        """Minkowski sum."""
        if self.is_empty or other.is_empty:
            return IntervalR.empty()
        return IntervalR.make(
            self.lo + other.lo,
            self.hi + other.hi,
            self.lo_closed and other.lo_closed,
            self.hi_closed and other.hi_closed,
        )

    def __neg__(self) -> "IntervalR":
        if self.is_empty:
            return self
        return IntervalR.make(-self.hi, -self.lo, self.hi_closed, self.lo_closed)

    def __mul__(self, other: "IntervalR") -> "IntervalR":
        """Minkowski product of two subsets of the half-line [0, inf)."""
        if self.is_empty or other.is_empty:
            return IntervalR.empty()
        if self.lo < 0 or other.lo < 0:
            raise ValueError("Minkowski product is only defined for non-negative intervals")
        lo = ext_mul_nonneg(self.lo, other.lo)
        hi = ext_mul_nonneg(self.hi, other.hi)
        lc = (self.lo_closed and other.lo_closed) or lo == 0.0 and (
            (self.lo == 0.0 and self.lo_closed) or (other.lo == 0.0 and other.lo_closed)
        )
        hc = self.hi_closed and other.hi_closed
        return IntervalR.make(lo, hi, lc, hc)

    def scale(self, c: float) -> "IntervalR":
        if self.is_empty:
            return self
        if c > 0:
            return IntervalR.make(c * self.lo, c * self.hi, self.lo_closed, self.hi_closed)
        if c < 0:
            return -(self.scale(-c))
        return IntervalR.point(0.0)

    def upper_set(self) -> "IntervalR":
        """``A_+``: every real above some element of the interval."""
        if self.is_empty:
            return self
        return IntervalR.make(self.lo, INF, self.lo_closed, False)

    def lower_set(self) -> "IntervalR":
        """``A_-``: every real below some element of the interval."""
        if self.is_empty:
            return self
        return IntervalR.make(-INF, self.hi, False, self.hi_closed)

    def subset_of(self, other: "IntervalR") -> bool:
        if self.is_empty:
            return True
        if other.is_empty:
            return False
        lo_ok = self.lo > other.lo or (self.lo == other.lo and (other.lo_closed or not self.lo_closed))
        hi_ok = self.hi < other.hi or (self.hi == other.hi and (other.hi_closed or not self.hi_closed))
        return lo_ok and hi_ok

    def hull(self, other: "IntervalR") -> "IntervalR":
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        lo_src = self if (self.lo, not self.lo_closed) <= (other.lo, not other.lo_closed) else other
        hi_src = self if (self.hi, self.hi_closed) >= (other.hi, other.hi_closed) else other
        return IntervalR.make(lo_src.lo, hi_src.hi, lo_src.lo_closed, hi_src.hi_closed)

    def __str__(self) -> str:
        if self.is_empty:
            return "∅"
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo!r}, {self.hi!r}{right}"

    def to_json(self):
        if self.is_empty:
            return None
        return {
            "lo": _json_float(self.lo),
            "hi": _json_float(self.hi),
            "lo_closed": self.lo_closed,
            "hi_closed": self.hi_closed,
        }


def _json_float(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _close(a: float, b: float, tol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))
