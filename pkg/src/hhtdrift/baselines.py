"""Reference detectors: DDM, EDDM, HDDM (A-test) and A-KS.

The three supervised monitors consume a correct/incorrect flag per item and
are wrapped by :class:`SupervisedDetector`, which requests every label
through the oracle, scores the classifier and retrains after a drift.  A-KS
is the attribute-wise KS Layer-I of HHT-AG used on its own.
"""

from __future__ import annotations

import math

from .classifier import TrainingConfig
from .detectors import DetectorStatus, HhtAg, StreamDetector
from .stats import RunningBoundedMean, hoeffding_epsilon, hoeffding_split_epsilon

STABLE, WARNING, DRIFT = DetectorStatus.STABLE, DetectorStatus.POTENTIAL, DetectorStatus.CONFIRMED


class DDM:
    """Drift Detection Method (Gama et al., 2004).

    Tracks the error rate ``p`` and its binomial std ``s = sqrt(p (1-p) / i)``
    together with the values at the minimum of ``p + s``.  Warning when
    ``p + s >= p_min + warn_scale * s_min``, drift when
    ``p + s >= p_min + drift_scale * s_min``.

    ``p`` is the Laplace-smoothed rate ``(errors + 1) / (i + 2)``: with the
    raw rate an error-free prefix drives ``s_min`` to zero and the very next
    error would signal a drift.
    """

    def __init__(self, drift_scale: float = 3.0, warn_scale: float = 2.0, min_samples: int = 30):
        self.drift_scale = drift_scale
        self.warn_scale = warn_scale
        self.min_samples = min_samples
        self.reset()

    def reset(self) -> None:
        self.i = 0
        self.errors = 0
        self.p = 0.5
        self.s = 0.0
        self.p_min = math.inf
        self.s_min = math.inf

    @property
    def statistic(self) -> float:
        return self.p + self.s

    def update(self, correct: bool) -> DetectorStatus:
        self.i += 1
        self.errors += not correct
        self.p = (self.errors + 1) / (self.i + 2)
        self.s = math.sqrt(self.p * (1 - self.p) / self.i)
        if self.i < self.min_samples:
            return STABLE
        if self.p + self.s <= self.p_min + self.s_min:
            self.p_min, self.s_min = self.p, self.s
        level = self.p + self.s
        if level >= self.p_min + self.drift_scale * self.s_min:
            return DRIFT
        if level >= self.p_min + self.warn_scale * self.s_min:
            return WARNING
        return STABLE


class EDDM:
    """Early Drift Detection Method (Baena-Garcia et al., 2006).

    Monitors the mean ``m`` and std ``s`` of the distance between consecutive
    errors.  Once ``min_errors`` errors were seen, the ratio of ``m + 2s`` to
    its running maximum below ``warn_ratio`` is a warning and below
    ``drift_ratio`` a drift.  Between errors the last level is held.
    """

    def __init__(self, warn_ratio: float = 0.95, drift_ratio: float = 0.90, min_errors: int = 30):
        self.warn_ratio = warn_ratio
        self.drift_ratio = drift_ratio
        self.min_errors = min_errors
        self.reset()

    def reset(self) -> None:
        self.i = 0
        self.n_errors = 0
        self.last_error = 0
        self.mean = 0.0
        self._m2 = 0.0
        self.max_level = 0.0
        self.ratio = 1.0
        self._level = STABLE

    def update(self, correct: bool) -> DetectorStatus:
        self.i += 1
        if correct:
            return self._level
        self.n_errors += 1
        dist = self.i - self.last_error
        self.last_error = self.i
        delta = dist - self.mean
        self.mean += delta / self.n_errors
        self._m2 += delta * (dist - self.mean)
        std = math.sqrt(self._m2 / self.n_errors)
        level = self.mean + 2 * std
        if self.n_errors < self.min_errors:
            return STABLE
        if level > self.max_level:
            self.max_level = level
        self.ratio = level / self.max_level
        if self.ratio < self.drift_ratio:
            self._level = DRIFT
        elif self.ratio < self.warn_ratio:
            self._level = WARNING
        else:
            self._level = STABLE
        return self._level


class HDDM:
    """Hoeffding drift detection, A-test (Frias-Blanco et al., 2015).

    The error indicator's overall mean is compared with the mean up to the
    cut point minimizing ``mean_i + eps_i``; warning and drift fire when the
    gap reaches the split Hoeffding bound at ``warn_conf`` and ``drift_conf``.
    """

    def __init__(self, warn_conf: float = 0.005, drift_conf: float = 0.001):
        self.warn_conf = warn_conf
        self.drift_conf = drift_conf
        self.reset()

    def reset(self) -> None:
        self.total = RunningBoundedMean(1.0)
        self.cut = RunningBoundedMean(1.0)
        self.cut_bound = math.inf
        self.gap = 0.0

    def update(self, correct: bool) -> DetectorStatus:
        z = self.total
        z.update(0.0 if correct else 1.0)
        bound = z.mean + hoeffding_epsilon(z.count, self.drift_conf)
        if bound <= self.cut_bound:
            self.cut = z.copy()
            self.cut_bound = bound
        if z.count <= self.cut.count:
            return STABLE
        n, m = self.cut.count, z.count - self.cut.count
        self.gap = z.mean - self.cut.mean
        if self.gap >= hoeffding_split_epsilon(n, m, self.drift_conf, 1.0):
            return DRIFT
        if self.gap >= hoeffding_split_epsilon(n, m, self.warn_conf, 1.0):
            return WARNING
        return STABLE


class SupervisedDetector(StreamDetector):
    """Runs an error-rate monitor on every item's revealed label.

    After a drift the classifier is retrained on the samples collected since
    the warning began; if fewer than ``window`` are available the monitor
    pauses until that many post-warning labels have arrived.
    """

    supervised = True

    def __init__(self, monitor, name: str, window: int = 100, training: TrainingConfig | None = None):
        super().__init__(window, training)
        self.monitor = monitor
        self.name = name
        self._warn_start: int | None = None
        self._retrain_from: int | None = None

    def observe(self, t, x):
        if t < self.window:
            self.last_statistic = None
            return STABLE
        label = int(self.oracle.request_labels(t, t + 1).labels[0])
        if self._retrain_from is not None:
            if t + 1 - self._retrain_from >= self.window:
                self._retrain(self.oracle.request_labels(self._retrain_from, t + 1), t)
                self._retrain_from = None
            return STABLE
        correct = self.predict(t, x) == label
        status = self.monitor.update(correct)
        self.last_statistic = self._statistic()
        if status is STABLE:
            self._warn_start = None
        elif status is WARNING:
            self.potential.append(t)
            if self._warn_start is None:
                self._warn_start = t
        else:
            self.potential.append(t)
            self.confirmed.append(t)
            self._retrain_from = self._warn_start if self._warn_start is not None else t
            self._warn_start = None
            self.monitor.reset()
            if t + 1 - self._retrain_from >= self.window:
                self._retrain(self.oracle.request_labels(self._retrain_from, t + 1), t)
                self._retrain_from = None
        return status

    def _statistic(self) -> float:
        m = self.monitor
        if isinstance(m, DDM):
            return m.statistic
        if isinstance(m, EDDM):
            return m.ratio
        return m.gap


def make_ddm(window=100, alpha=3.0, beta=2.0, min_samples=30, training=None):
    return SupervisedDetector(DDM(alpha, beta, min_samples), "DDM", window, training)


def make_eddm(window=100, alpha=0.95, beta=0.90, min_errors=30, training=None):
    return SupervisedDetector(EDDM(alpha, beta, min_errors), "EDDM", window, training)


def make_hddm(window=100, alpha_w=0.005, alpha_d=0.001, training=None):
    return SupervisedDetector(HDDM(alpha_w, alpha_d), "HDDM", window, training)


class AKS(HhtAg):
    """Attribute-wise KS detector: every Layer-I rejection is a drift.

    On detection the latest ``window`` labels are requested and the
    classifier is retrained on them, as for the hierarchical detectors.
    """

    name = "A-KS"

    def __init__(self, theta: float = 0.001, window: int = 100, training: TrainingConfig | None = None):
        super().__init__(theta1=theta, theta2=theta, window=window, layer2=False, training=training)
