"""Request-only access to stream labels with consumption metering."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .classifier import LabeledWindow


class Sample(NamedTuple):
    t: int
    features: np.ndarray
    label: int | None = None


@dataclass
class LabeledStream:
    """Fully labeled, chronologically ordered stream plus its ground truth."""

    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    true_drifts: list[int] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim == 1:
            self.features = self.features.reshape(len(self.features), -1)
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if len(self.features) != len(self.labels):
            raise ValueError("features and labels differ in length")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.features.shape[1] if self.features.ndim == 2 else 0


class MeteredStream:
    """Hides labels behind :meth:`request_labels` and counts what is revealed.

    Features are consumed in order through :meth:`next`.  Labels may be
    requested for any index below ``cursor + lookahead``, which lets a
    detector ask for the ``lookahead`` samples following the current one;
    the harness treats such a request as stalling until those samples have
    arrived.
    """

    def __init__(self, stream: LabeledStream, lookahead: int = 0):
        if lookahead < 0:
            raise ValueError("lookahead must be >= 0")
        self._stream = stream
        self.lookahead = int(lookahead)
        self.cursor = 0
        self._revealed = np.zeros(len(stream), dtype=bool)
        self._n_revealed = 0

    def __len__(self) -> int:
        return len(self._stream)

    @property
    def num_classes(self) -> int:
        return self._stream.num_classes

    @property
    def dim(self) -> int:
        return self._stream.dim

    def next(self) -> tuple[int, np.ndarray] | None:
        """Next ``(t, features)`` or ``None`` at end of stream."""
        if self.cursor >= len(self._stream):
            return None
        t = self.cursor
        self.cursor += 1
        return t, self._stream.features[t]

    def __iter__(self):
        while (item := self.next()) is not None:
            yield item

    def check_range(self, i: int, j: int) -> bool:
        return 0 <= i < j <= min(len(self._stream), self.cursor + self.lookahead)

    def request_labels(self, i: int, j: int) -> LabeledWindow:
        """Reveal labels for ``[i, j)``; only newly revealed indices are metered."""
        if not self.check_range(i, j):
            raise IndexError(f"label range [{i}, {j}) not requestable at cursor {self.cursor}")
        fresh = ~self._revealed[i:j]
        self._n_revealed += int(fresh.sum())
        self._revealed[i:j] = True
        return LabeledWindow(self._stream.features[i:j], self._stream.labels[i:j], start=i)

    @property
    def labels_used(self) -> int:
        return self._n_revealed

    @property
    def label_fraction(self) -> float:
        n = len(self._stream)
        return self._n_revealed / n if n else 0.0

    def revealed_indices(self) -> np.ndarray:
        return np.flatnonzero(self._revealed)
