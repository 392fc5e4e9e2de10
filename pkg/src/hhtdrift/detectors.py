"""Hierarchical drift detectors that request labels only to reverify candidates.

Both detectors run an unsupervised Layer-I test on every item and only
request labels when it fires.  The labeled Layer-II test then confirms the
drift (the classifier is retrained and all statistics reset) or denies it.

* :class:`HhtCu` tracks the mean classification uncertainty with Hoeffding
  bounds and reverifies with a two-directional permutation test.
* :class:`HhtAg` runs attribute-wise KS tests between a frozen reference
  window and a sliding window and reverifies with 2-D KS tests on
  ``(attribute, label)`` pairs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .classifier import (
    LabeledWindow,
    PosteriorClassifier,
    TrainingConfig,
    label_encoding_of,
    train,
    uncertainty_bound,
    zero_one_loss,
)
from .oracle import MeteredStream
from .stats import (
    RunningBoundedMean,
    UntestableError,
    hoeffding_epsilon,
    hoeffding_split_epsilon,
    ks2d_two_sample,
    ks_statistic_sorted,
    ks_threshold,
    permutation_test,
)

__all__ = [
    "DetectorStatus",
    "Event",
    "StreamDetector",
    "HhtCu",
    "HhtAg",
    "hht_cu_layer2",
    "label_encoding_of",
]

logger = logging.getLogger(__name__)


class DetectorStatus(str, Enum):
    STABLE = "Stable"
    POTENTIAL = "PotentialDrift"
    CONFIRMED = "ConfirmedDrift"


@dataclass(frozen=True)
class Event:
    t: int
    status: DetectorStatus
    layer1_statistic: float | None
    labels_used_so_far: int
    deferred: bool = False

    def to_dict(self) -> dict:
        d = {
            "t": self.t,
            "status": self.status.value,
            "layer1_statistic": self.layer1_statistic,
            "labels_used_so_far": self.labels_used_so_far,
        }
        if self.deferred:
            d["deferred"] = True
        return d


def derive_seed(*parts: int) -> int:
    """Deterministic 64-bit seed from a tuple of non-negative integers."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)[0])


class StreamDetector:
    """Common plumbing: oracle, classifier, drift logs and frozen predictions.

    The harness calls :meth:`attach` once, then :meth:`predict` and
    :meth:`observe` for every item in order, then :meth:`finish`.
    """

    name = "detector"
    supervised = False

    def __init__(self, window: int = 100, training: TrainingConfig | None = None):
        if window < 2:
            raise ValueError("window must be >= 2")
        self.window = int(window)
        self.training = training or TrainingConfig()
        self.potential: list[int] = []
        self.confirmed: list[int] = []
        self.last_statistic: float | None = None
        self.oracle: MeteredStream | None = None
        self.model: PosteriorClassifier | None = None
        self.seed = 0
        self._frozen_start = 0
        self._frozen: np.ndarray = np.empty(0, dtype=np.int64)

    def attach(self, oracle: MeteredStream, model: PosteriorClassifier, seed: int = 0) -> None:
        self.oracle = oracle
        self.model = model
        self.seed = int(seed)

    def predict(self, t: int, x) -> int:
        k = t - self._frozen_start
        if 0 <= k < self._frozen.size:
            return int(self._frozen[k])
        return int(np.argmax(self.model.scores(x)))

    def _freeze_predictions(self, start: int, features: np.ndarray) -> None:
        # items that arrive while a retrain is pending keep the old model's call
        self._frozen_start = start
        self._frozen = self.model.predict(features) if len(features) else np.empty(0, dtype=np.int64)

    def _retrain(self, window: LabeledWindow, t: int) -> None:
        self.model = train(window, self.training, seed=derive_seed(self.seed, t),
                           num_classes=self.oracle.num_classes)

    def observe(self, t: int, x) -> DetectorStatus:
        raise NotImplementedError

    def finish(self) -> list[Event]:
        return []


# --------------------------------------------------------------------------
# HHT-CU
# --------------------------------------------------------------------------


def _cu_losses(training: TrainingConfig, num_classes: int | None):
    def forward(first: LabeledWindow, second: LabeledWindow) -> float:
        return zero_one_loss(train(first, training, num_classes=num_classes), second)

    def reverse(first: LabeledWindow, second: LabeledWindow) -> float:
        return zero_one_loss(train(second, training, num_classes=num_classes), first)

    return forward, reverse


def hht_cu_layer2(pool: LabeledWindow, theta2: float, permutations: int = 500, seed: int = 0,
                  split: int | None = None, training: TrainingConfig | None = None,
                  num_classes: int | None = None) -> bool:
    """Permutation reverification of an HHT-CU candidate.

    The pool is split at ``split`` (default: half).  One classifier is trained
    on the first part and scored on the second, another the other way round;
    the drift is confirmed if either loss is significantly larger than the
    losses of shuffled splits at level ``theta2``.  A single-class pool is
    untestable and never confirms.
    """
    n = len(pool)
    split = n // 2 if split is None else int(split)
    forward, reverse = _cu_losses(training or TrainingConfig(), num_classes)
    first, second = pool.take(slice(0, split)), pool.take(slice(split, n))
    try:
        for loss_fn in (forward, reverse):
            observed = loss_fn(first, second)
            p = permutation_test(pool, split, observed, permutations, seed, loss_fn, alpha=theta2)
            if p < theta2:
                return True
    except UntestableError:
        return False
    return False


class HhtCu(StreamDetector):
    """Hierarchical hypothesis testing on classification uncertainty.

    Layer-I keeps the running mean of ``u_t`` since the last (re)start and a
    cutoff snapshot taken wherever ``mean + eps`` reached its minimum.  It
    fires once the overall mean exceeds the cutoff mean by the split Hoeffding
    bound.  Layer-II requests labels for ``[t - N, t + N)``.  On confirmation
    the model is retrained on ``[t, t + N)`` and the items of that block are
    treated as warm-up; on denial the Layer-I statistics restart and the
    model is kept.
    """

    name = "HHT-CU"

    def __init__(self, theta1: float = 0.01, theta2: float = 0.01, window: int = 100,
                 permutations: int = 500, min_cut: int = 30, min_tail: int = 30,
                 layer2: bool = True, training: TrainingConfig | None = None):
        super().__init__(window, training)
        self.theta1 = theta1
        self.theta2 = theta2
        self.permutations = permutations
        self.min_cut = min_cut
        self.min_tail = min_tail
        self.layer2 = layer2
        self._warm_until = self.window
        self._pending: int | None = None

    def attach(self, oracle, model, seed=0):
        super().attach(oracle, model, seed)
        self.range_width = uncertainty_bound(model.num_classes)
        self.restart()

    def restart(self) -> None:
        self.z_bar = RunningBoundedMean(self.range_width)
        self.x_cut = RunningBoundedMean(self.range_width)
        self.cut_bound = float("inf")

    def layer1_update(self, u: float) -> bool:
        """Feed one uncertainty value; return True if Layer-I rejects."""
        z = self.z_bar
        z.update(u)
        bound = z.mean + self.range_width * hoeffding_epsilon(z.count, self.theta1)
        if bound <= self.cut_bound:
            self.x_cut = z.copy()
            self.cut_bound = bound
        cut = self.x_cut
        self.last_statistic = z.mean - cut.mean
        if z.count < 2 or cut.count < self.min_cut or z.count <= cut.count:
            return False
        eps = hoeffding_split_epsilon(cut.count, z.count - cut.count, self.theta1, self.range_width)
        return self.last_statistic >= eps

    def observe(self, t, x):
        if t < self._warm_until or self._pending is not None:
            self.last_statistic = None
            return DetectorStatus.STABLE
        s = self.model.scores(x)
        e = np.exp(s - s.max())
        post = e / e.sum()
        u = float(np.linalg.norm(label_encoding_of(post) - post))
        if not self.layer1_update(u):
            return DetectorStatus.STABLE
        self.potential.append(t)
        lo, hi = t - self.window, t + self.window
        if not self.oracle.check_range(lo, hi):
            logger.info("%s: Layer-II window for t=%d runs past the stream; deferred", self.name, t)
            self._pending = t
            return DetectorStatus.POTENTIAL
        pool = self.oracle.request_labels(lo, hi)
        if self._confirm(pool, t):
            self._accept(pool, t)
            return DetectorStatus.CONFIRMED
        self.restart()
        return DetectorStatus.POTENTIAL

    def _confirm(self, pool: LabeledWindow, t: int) -> bool:
        if not self.layer2:
            return True
        return hht_cu_layer2(pool, self.theta2, self.permutations, derive_seed(self.seed, t),
                             split=self.window, training=self.training,
                             num_classes=self.oracle.num_classes)

    def _accept(self, pool: LabeledWindow, t: int) -> None:
        self.confirmed.append(t)
        recent = pool.take(slice(self.window, len(pool)))
        self._freeze_predictions(t + 1, recent.features[1:])
        self._retrain(recent, t)
        self._warm_until = t + len(recent)
        self.restart()

    def finish(self):
        t = self._pending
        if t is None:
            return []
        self._pending = None
        end = len(self.oracle)
        if end - t < self.min_tail:
            return []
        pool = self.oracle.request_labels(t - self.window, end)
        if not self._confirm(pool, t):
            return []
        self.confirmed.append(t)
        return [Event(t, DetectorStatus.CONFIRMED, None, self.oracle.labels_used, deferred=True)]


# --------------------------------------------------------------------------
# HHT-AG
# --------------------------------------------------------------------------


class HhtAg(StreamDetector):
    """Hierarchical hypothesis testing on attribute-wise goodness of fit.

    ``W1`` holds the first ``N`` items after the last confirmed drift and is
    then frozen; ``W2`` holds the latest ``N`` items after ``W1``.  Layer-I
    KS-tests every attribute of ``W1`` against ``W2`` at ``theta1``.  On any
    rejection the labels backing both windows are requested and ``d``
    Peacock 2-D KS tests on ``(x_k, y)`` run at ``theta2``; any rejection
    confirms.  After confirmation the classifier is retrained on ``W2`` and
    both windows are rebuilt from the next item on.

    With ``layer2=False`` every Layer-I rejection is accepted directly, which
    is the A-KS detector.
    """

    name = "HHT-AG"

    def __init__(self, theta1: float = 0.001, theta2: float = 0.001, window: int = 100,
                 permutations: int = 2000, layer2: bool = True,
                 training: TrainingConfig | None = None):
        super().__init__(window, training)
        self.theta1 = theta1
        self.theta2 = theta2
        self.permutations = permutations
        self.layer2 = layer2
        self.layer2_denials = 0
        self.threshold = ks_threshold(self.window, self.window, theta1)
        self._start = 0

    def attach(self, oracle, model, seed=0):
        super().attach(oracle, model, seed)
        d = oracle.dim
        self._w1 = np.empty((self.window, d))
        self._w2 = np.empty((self.window, d))
        self._reset_windows(0)

    def _reset_windows(self, start: int) -> None:
        self._start = start
        self._w1_sorted = None
        self._pos = 0

    def layer1(self, t: int, x) -> np.ndarray | None:
        """Slide the windows by ``x``; return the KS statistics once both are full."""
        k = t - self._start
        n = self.window
        if k < 0:
            return None
        if k < n:
            self._w1[k] = x
            if k == n - 1:
                self._w1_sorted = np.sort(self._w1, axis=0)
            return None
        self._w2[self._pos] = x
        self._pos = (self._pos + 1) % n
        if k < 2 * n - 1:
            return None
        w2 = np.sort(self._w2, axis=0)
        w1 = self._w1_sorted
        return np.array([ks_statistic_sorted(w1[:, i], w2[:, i]) for i in range(w1.shape[1])])

    def observe(self, t, x):
        stats = self.layer1(t, x)
        if stats is None:
            self.last_statistic = None
            return DetectorStatus.STABLE
        self.last_statistic = float(stats.max())
        if not np.any(stats > self.threshold):
            return DetectorStatus.STABLE
        self.potential.append(t)
        if self.layer2 and not self._layer2(t):
            self.layer2_denials += 1
            return DetectorStatus.POTENTIAL
        self.confirmed.append(t)
        self._retrain(self.oracle.request_labels(t - self.window + 1, t + 1), t)
        self._reset_windows(t + 1)
        return DetectorStatus.CONFIRMED

    def _layer2(self, t: int) -> bool:
        n = self.window
        w1 = self.oracle.request_labels(self._start, self._start + n)
        w2 = self.oracle.request_labels(t - n + 1, t + 1)
        for k in range(w1.dim):
            a = np.column_stack((w1.features[:, k], w1.labels))
            b = np.column_stack((w2.features[:, k], w2.labels))
            res = ks2d_two_sample(a, b, self.theta2, self.permutations,
                                  derive_seed(self.seed, t, k), stop_early=True)
            if res.reject:
                return True
        return False
