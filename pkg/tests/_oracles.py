"""Independent brute-force oracles used to pin expected values.

These deliberately re-derive curve parametrizations and distances from
scratch (dense sampling plus a local golden-section polish) so they share
no code with the projection solvers they check.
"""

from __future__ import annotations

import math

import numpy as np

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def ellipse_curve(b, t):
    t = np.asarray(t, dtype=float)
    return np.stack([np.cos(t), b * np.sin(t)], axis=-1)


def psphere_curve(p, t):
    t = np.asarray(t, dtype=float)
    c, s = np.cos(t), np.sin(t)
    return np.stack(
        [np.sign(c) * np.abs(c) ** (2.0 / p), np.sign(s) * np.abs(s) ** (2.0 / p)],
        axis=-1,
    )


def _golden(g, lo, hi, iters=90):
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = g(x1), g(x2)
    for _ in range(iters):
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = g(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = g(x2)
    return 0.5 * (lo + hi)


def brute_min_distance(curve, q, n=100_000):
    """Global min distance from q to the curve: n samples + local polish.

    ``curve`` maps angle parameters in [0, 2pi) to points.
    """
    t = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    pts = curve(t)
    d = np.hypot(pts[:, 0] - q[0], pts[:, 1] - q[1])
    best = np.inf
    step = 2.0 * np.pi / n
    # polish around the few best samples (symmetric minimizers tie)
    order = np.argsort(d, kind="stable")[:8]

    def g(tt):
        p = curve(np.array([tt]))[0]
        return math.hypot(p[0] - q[0], p[1] - q[1])

    for i in order:
        tt = _golden(g, t[i] - step, t[i] + step)
        best = min(best, g(tt))
    return best


def brute_nearest_point(curve, q, n=100_000):
    """Argmin version of brute_min_distance."""
    t = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    pts = curve(t)
    d = np.hypot(pts[:, 0] - q[0], pts[:, 1] - q[1])
    i = int(np.argmin(d))
    step = 2.0 * np.pi / n

    def g(tt):
        p = curve(np.array([tt]))[0]
        return math.hypot(p[0] - q[0], p[1] - q[1])

    tt = _golden(g, t[i] - step, t[i] + step)
    return curve(np.array([tt]))[0]


def line_distance_min(b_or_p, kind, line_abc, n=200_000):
    """Min |alpha x + beta y - gamma| over the curve, by sampling + polish."""
    a, bb, c = line_abc

    if kind == "ellipse":
        curve = lambda t: ellipse_curve(b_or_p, t)
    else:
        curve = lambda t: psphere_curve(b_or_p, t)

    t = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    pts = curve(t)
    d = np.abs(a * pts[:, 0] + bb * pts[:, 1] - c)
    i = int(np.argmin(d))
    step = 2.0 * np.pi / n

    def g(tt):
        p = curve(np.array([tt]))[0]
        return abs(a * p[0] + bb * p[1] - c)

    return g(_golden(g, t[i] - step, t[i] + step))
