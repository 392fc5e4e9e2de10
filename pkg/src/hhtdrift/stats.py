"""Statistical primitives used by the drift detectors.

Hoeffding error bounds, the one-dimensional two-sample Kolmogorov-Smirnov
test, Peacock's two-dimensional two-sample KS test and a generic
label-shuffling permutation test.

All randomness goes through :func:`numpy.random.default_rng`, i.e. the PCG64
bit generator seeded via ``SeedSequence``.  A fixed integer seed therefore
reproduces every permutation bit-exactly across platforms and builds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit


class UntestableError(ValueError):
    """Raised when a permutation pool carries no usable label variation."""


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


@dataclass
class RunningBoundedMean:
    """Incrementally maintained mean of values bounded in ``[0, range_width]``.

    ``count`` and ``mean`` are updated in place by :meth:`update`; the
    Hoeffding error of the current mean is available via :meth:`epsilon`.
    """

    range_width: float = 1.0
    count: int = 0
    mean: float = 0.0

    def __post_init__(self) -> None:
        if self.range_width <= 0:
            raise ValueError("range_width must be positive")

    def update(self, x: float) -> None:
        self.count += 1
        self.mean += (x - self.mean) / self.count

    def epsilon(self, alpha: float) -> float:
        """Hoeffding error of the mean at significance ``alpha``."""
        return self.range_width * hoeffding_epsilon(self.count, alpha)

    def reset(self) -> None:
        self.count = 0
        self.mean = 0.0

    def copy(self) -> "RunningBoundedMean":
        return RunningBoundedMean(self.range_width, self.count, self.mean)


def hoeffding_epsilon(n: int, alpha: float) -> float:
    """One-sided Hoeffding error for the mean of ``n`` values in ``[0, 1]``.

    Returns ``sqrt(ln(1/alpha) / (2n))``.  Callers with a different value
    range multiply the result by the range width.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_alpha(alpha)
    return math.sqrt(math.log(1.0 / alpha) / (2.0 * n))


def hoeffding_split_epsilon(n: int, m: int, alpha: float, range_width: float = 1.0) -> float:
    """Hoeffding bound on the gap between a prefix mean and the overall mean.

    ``n`` values precede the cut point and ``m`` follow it.  Returns
    ``range_width * sqrt(m * ln(1/alpha) / (2 n (n + m)))``.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if range_width <= 0:
        raise ValueError("range_width must be positive")
    _check_alpha(alpha)
    return range_width * math.sqrt(m * math.log(1.0 / alpha) / (2.0 * n * (n + m)))


# --------------------------------------------------------------------------
# One-dimensional KS
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class KsResult:
    statistic: float
    threshold: float
    reject: bool


def ks_critical_coefficient(alpha: float) -> float:
    """Asymptotic two-sided Kolmogorov coefficient ``s(alpha)``.

    ``sqrt(-0.5 * ln(alpha / 2))``; agrees with the usual printed tables
    (1.36 at 0.05, 1.63 at 0.01, 1.95 at 0.001) to about three decimals.
    """
    _check_alpha(alpha)
    return math.sqrt(-0.5 * math.log(alpha / 2.0))


def ks_threshold(m: int, n: int, alpha: float) -> float:
    return ks_critical_coefficient(alpha) * math.sqrt((m + n) / (m * n))


def ks_statistic_sorted(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample KS statistic for already sorted 1-D arrays.

    Empirical CDFs are right-continuous (``#{c <= x} / |C|``) and the
    supremum is taken over the pooled sample values, which is where the
    step functions can change.
    """
    pooled = np.concatenate((a, b))
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_two_sample(a, b, alpha: float) -> KsResult:
    """Two-sample KS test; rejects when the statistic exceeds
    ``s(alpha) * sqrt((m + n) / (m n))``.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    stat = ks_statistic_sorted(a, b)
    thr = ks_threshold(a.size, b.size, alpha)
    return KsResult(stat, thr, stat > thr)


# --------------------------------------------------------------------------
# Two-dimensional KS (Peacock)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Ks2dResult:
    statistic: float
    p_value: float
    reject: bool


def _as_points(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        arr = arr.reshape(-1, 2)
    return arr


@njit(cache=True)
def _ks2d_kernel(cx, cy, nx, ny, members, na, nb):
    """Peacock statistic for each row of ``members``.

    ``cx``/``cy`` are grid coordinates of the pooled points and each row of
    ``members`` lists the ``na`` pooled indices forming sample ``a``.  Closed
    quadrant counts come from zero-padded 2-D prefix sums; ``b``'s counts
    are the pooled counts minus ``a``'s.
    """
    n = cx.size
    T = np.zeros((nx + 1, ny + 1), dtype=np.int64)
    for p in range(n):
        T[cx[p] + 1, cy[p] + 1] += 1
    for i in range(1, nx + 1):
        for j in range(1, ny + 1):
            T[i, j] += T[i - 1, j] + T[i, j - 1] - T[i - 1, j - 1]
    batch = members.shape[0]
    out = np.empty(batch)
    S = np.empty((nx + 1, ny + 1), dtype=np.int64)
    for r in range(batch):
        S[:, :] = 0
        for k in range(na):
            p = members[r, k]
            S[cx[p] + 1, cy[p] + 1] += 1
        for i in range(1, nx + 1):
            for j in range(1, ny + 1):
                S[i, j] += S[i - 1, j] + S[i, j - 1] - S[i - 1, j - 1]
        best = 0.0
        for i in range(nx):
            for j in range(ny):
                a0 = S[i + 1, j + 1]
                a1 = S[i + 1, ny] - S[i + 1, j]
                a2 = S[nx, j + 1] - S[i, j + 1]
                a3 = S[nx, ny] - S[i, ny] - S[nx, j] + S[i, j]
                t0 = T[i + 1, j + 1]
                t1 = T[i + 1, ny] - T[i + 1, j]
                t2 = T[nx, j + 1] - T[i, j + 1]
                t3 = T[nx, ny] - T[i, ny] - T[nx, j] + T[i, j]
                d = max(abs(a0 / na - (t0 - a0) / nb), abs(a1 / na - (t1 - a1) / nb),
                        abs(a2 / na - (t2 - a2) / nb), abs(a3 / na - (t3 - a3) / nb))
                if d > best:
                    best = d
        out[r] = best
    return out


def _pooled_grid(a: np.ndarray, b: np.ndarray):
    """Grid coordinates of the pooled points over their distinct x and y values."""
    pooled = np.concatenate((a, b))
    ux, rx = np.unique(pooled[:, 0], return_inverse=True)
    uy, ry = np.unique(pooled[:, 1], return_inverse=True)
    return rx.ravel().astype(np.int64), ry.ravel().astype(np.int64), ux.size, uy.size


def ks2d_statistic(a, b) -> float:
    """Peacock's two-sample 2-D KS statistic.

    Anchors range over the full grid of pooled x coordinates crossed with
    pooled y coordinates; at each anchor the four closed quadrants are
    compared.  Quadrant masses only change at data coordinates, so this is
    the supremum over the whole plane.
    """
    a = _as_points(a)
    b = _as_points(b)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both samples must be non-empty")
    cx, cy, nx, ny = _pooled_grid(a, b)
    ident = np.arange(len(a), dtype=np.int64)[None, :]
    return float(_ks2d_kernel(cx, cy, nx, ny, ident, len(a), len(b))[0])


def ks2d_two_sample(a, b, alpha: float, permutations: int = 200, seed: int = 0,
                    chunk: int = 250, stop_early: bool = False) -> Ks2dResult:
    """Peacock 2-D KS test calibrated by pooled permutations.

    ``p_value = (1 + #{permuted statistic >= observed}) / (permutations + 1)``
    so the smallest attainable value is ``1 / (permutations + 1)``; choose
    ``permutations`` well above ``1 / alpha`` for the test to be able to reject.

    With ``stop_early`` the permutations are abandoned (per chunk) once the
    p-value cannot drop below ``alpha``; ``p_value`` is then a partial count,
    still ``>= alpha``, and ``reject`` is unaffected.
    """
    a = _as_points(a)
    b = _as_points(b)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both samples must be non-empty")
    if permutations < 1:
        raise ValueError("permutations must be >= 1")
    _check_alpha(alpha)
    na, nb = len(a), len(b)
    n = na + nb
    cx, cy, nx, ny = _pooled_grid(a, b)
    ident = np.arange(na, dtype=np.int64)[None, :]
    observed = _ks2d_kernel(cx, cy, nx, ny, ident, na, nb)[0]

    # rows of a random permutation matrix; the first na entries form sample a
    rng = np.random.default_rng(seed)
    exceed = 0
    done = 0
    while done < permutations:
        size = min(chunk, permutations - done)
        order = rng.permuted(np.tile(np.arange(n, dtype=np.int64), (size, 1)), axis=1)
        stats = _ks2d_kernel(cx, cy, nx, ny, np.ascontiguousarray(order[:, :na]), na, nb)
        exceed += int(np.count_nonzero(stats >= observed - 1e-12))
        done += size
        if stop_early and 1 + exceed >= alpha * (permutations + 1):
            break
    p = (1 + exceed) / (permutations + 1)
    return Ks2dResult(float(observed), p, p < alpha)


# --------------------------------------------------------------------------
# Permutation test
# --------------------------------------------------------------------------


def permutation_test(pool, split_index: int, observed_loss: float, permutations: int,
                     seed: int, loss_fn: Callable, alpha: float | None = None) -> float:
    """Label-shuffling permutation test on a split pool.

    ``pool`` is a :class:`~hhtdrift.classifier.LabeledWindow` (anything with
    ``take`` and ``labels``).  Each shuffle permutes the pool uniformly, splits
    it at ``split_index`` and evaluates ``loss_fn(first, second)``.  Returns
    ``(1 + #{shuffled loss >= observed_loss}) / (permutations + 1)``.

    When ``alpha`` is given the loop stops as soon as the p-value can no
    longer fall below ``alpha``; the returned value is then the running
    value, already ``>= alpha``, and the reject decision is unchanged.

    Raises :class:`UntestableError` if the pool holds a single class.
    """
    n = len(pool)
    if not 0 < split_index < n:
        raise ValueError("split_index must lie strictly inside the pool")
    if permutations < 1:
        raise ValueError("permutations must be >= 1")
    if np.unique(pool.labels).size < 2:
        raise UntestableError("pool contains a single class")
    rng = np.random.default_rng(seed)
    exceed = 0
    # p < alpha requires 1 + exceed < alpha * (permutations + 1)
    limit = None if alpha is None else alpha * (permutations + 1) - 1
    for _ in range(permutations):
        shuffled = pool.take(rng.permutation(n))
        loss = loss_fn(shuffled.take(slice(0, split_index)), shuffled.take(slice(split_index, n)))
        if loss >= observed_loss:
            exceed += 1
            if limit is not None and exceed >= limit:
                break
    return (1 + exceed) / (permutations + 1)
