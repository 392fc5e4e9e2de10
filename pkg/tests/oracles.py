"""Slow, obviously-correct reference implementations used as test oracles."""

import numpy as np


def brute_ks(a, b) -> float:
    """O((m+n)^2) sweep: evaluate both right-continuous ECDFs at every pooled value."""
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    best = 0.0
    for x in a + b:
        fa = sum(1 for v in a if v <= x) / len(a)
        fb = sum(1 for v in b if v <= x) / len(b)
        best = max(best, abs(fa - fb))
    return best


def _quadrant_mass(pts, x, y):
    n = len(pts)
    q = [0, 0, 0, 0]
    for px, py in pts:
        if px <= x and py <= y:
            q[0] += 1
        if px >= x and py <= y:
            q[1] += 1
        if px <= x and py >= y:
            q[2] += 1
        if px >= x and py >= y:
            q[3] += 1
    return [c / n for c in q]


def brute_ks2d(a, b) -> float:
    """Peacock statistic by explicit enumeration of closed quadrants.

    Anchors are all ``(x, y)`` with ``x`` from the pooled x values and ``y``
    from the pooled y values.
    """
    a = [tuple(map(float, p)) for p in a]
    b = [tuple(map(float, p)) for p in b]
    xs = sorted({p[0] for p in a + b})
    ys = sorted({p[1] for p in a + b})
    best = 0.0
    for x in xs:
        for y in ys:
            qa = _quadrant_mass(a, x, y)
            qb = _quadrant_mass(b, x, y)
            best = max(best, max(abs(u - v) for u, v in zip(qa, qb)))
    return best


def brute_cutoff_bounds(us, range_width, alpha):
    """Replay of the running minimum of ``mean_i + range * eps_i`` over prefixes."""
    out = []
    best = np.inf
    total = 0.0
    for i, u in enumerate(us, start=1):
        total += u
        v = total / i + range_width * np.sqrt(np.log(1 / alpha) / (2 * i))
        best = min(best, v)
        out.append(best)
    return out
