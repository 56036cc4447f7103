"""Random piecewise-linear operators for property tests."""

from __future__ import annotations

import numpy as np

from concop.monotone_graph import MonoCurve, Orientation, build_curve


def random_curve(rng: np.random.Generator, orientation="up", n_max: int = 5,
                 staircase: bool = False, maximal: bool = True, nonneg: bool = False,
                 domain_lo: float | None = None) -> MonoCurve:
    """Random maximal PL curve.

    ``staircase`` keeps every segment horizontal or vertical.  ``nonneg``
    keeps actual values in ``[0, inf)`` with horizontal tails toward the
    small values.  ``domain_lo`` cuts the domain at that point with a
    vertical completion.
    """
    o = Orientation(orientation)
    s = o.sign
    n = int(rng.integers(1, n_max + 1))
    dx = rng.uniform(0.0, 2.0, n - 1)
    du = rng.uniform(0.0, 2.0, n - 1)
    if staircase:
        vert = rng.random(n - 1) < 0.5
        dx = np.where(vert, 0.0, np.maximum(dx, 0.1))
        du = np.where(vert, np.maximum(du, 0.1), 0.0)
    else:
        kind = rng.integers(0, 3, n - 1)
        dx = np.where(kind == 1, 0.0, dx + 0.05)
        du = np.where(kind == 2, 0.0, du + 0.05)
    x0 = rng.uniform(-3, 3) if domain_lo is None else domain_lo
    u0 = rng.uniform(-3, 3)
    X = x0 + np.concatenate([[0.0], np.cumsum(dx)])
    U = u0 + np.concatenate([[0.0], np.cumsum(du)])
    if nonneg:
        U = U - U.min() + rng.uniform(0.0, 1.0) if o is Orientation.UP else U - U.max() - rng.uniform(0.0, 1.0)
    rays = ["horizontal", "vertical"] if staircase else ["horizontal", "vertical", "sloped"]

    def pick():
        r = rays[int(rng.integers(0, len(rays)))]
        return float(rng.uniform(0.2, 3.0)) if r == "sloped" else r

    lr, rr = pick(), pick()
    if nonneg:
        # values shrink toward the left (up) or the right (down); keep that tail flat
        if o is Orientation.UP:
            lr = "horizontal"
        else:
            rr = "horizontal"
    if domain_lo is not None:
        lr = "vertical"
    if not maximal:
        if rng.random() < 0.5:
            lr = None
        else:
            rr = None
    return build_curve(o, list(zip(X, s * U)), lr, rr)


def random_decay(rng: np.random.Generator, n_max: int = 6, start: float = 0.0,
                 zero_tail: bool = True) -> MonoCurve:
    """Nonincreasing PL curve on ``[start, inf)`` with positive values, vertical at ``start``.

    With ``zero_tail`` the values reach 0 and stay there.
    """
    n = int(rng.integers(1, n_max + 1))
    kind = rng.integers(0, 3, n)
    dx = np.where(kind == 1, 0.0, rng.uniform(0.05, 2.0, n))
    dy = np.where(kind == 2, 0.0, rng.uniform(0.05, 2.0, n))
    X = start + np.concatenate([[0.0], np.cumsum(dx)])
    Y = np.concatenate([[0.0], np.cumsum(dy)])
    Y = Y[-1] - Y
    if not zero_tail:
        Y = Y + rng.uniform(0.1, 1.0)
    return build_curve(Orientation.DOWN, list(zip(X, Y)), "vertical", "horizontal")
