"""Multinomial logistic regression emitting class posteriors.

The model is fit by full-batch gradient descent on standardized features for
a fixed number of epochs, starting from zero weights, so training is a pure
function of the window and the hyperparameters.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numba import njit


@dataclass(frozen=True)
class LabeledWindow:
    """Ordered block of labeled samples: features ``(n, d)`` and labels ``(n,)``."""

    features: np.ndarray
    labels: np.ndarray
    start: int = 0

    def __post_init__(self) -> None:
        X = np.asarray(self.features, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size else X.reshape(0, 1)
        y = np.asarray(self.labels, dtype=np.int64).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError("features and labels differ in length")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    def __len__(self) -> int:
        return self.labels.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def take(self, idx) -> "LabeledWindow":
        return LabeledWindow(self.features[idx], self.labels[idx])

    @classmethod
    def concat(cls, *windows: "LabeledWindow") -> "LabeledWindow":
        return cls(np.concatenate([w.features for w in windows]),
                   np.concatenate([w.labels for w in windows]),
                   windows[0].start if windows else 0)


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 200
    learning_rate: float = 0.1
    l2: float = 1e-4


@dataclass(frozen=True)
class TrainingMeta:
    window_size: int
    epochs: int
    learning_rate: float
    l2: float
    seed: int


@njit(cache=True)
def _loss_grad(W, Xb, y, l2):
    """Mean cross-entropy plus ``l2/2 * ||W_nobias||^2`` and its gradient."""
    n, p = Xb.shape
    K = W.shape[0]
    G = np.zeros((K, p))
    S = np.empty(K)
    loss = 0.0
    for i in range(n):
        top = 0
        for k in range(K):
            s = 0.0
            for j in range(p):
                s += W[k, j] * Xb[i, j]
            S[k] = s
            if s > S[top]:
                top = k
        m = S[top]
        z = 0.0
        for k in range(K):
            S[k] = math.exp(S[k] - m)
            z += S[k]
        loss -= math.log(S[y[i]] / z)
        for k in range(K):
            r = S[k] / z
            if y[i] == k:
                r -= 1.0
            for j in range(p):
                G[k, j] += r * Xb[i, j]
    loss /= n
    for k in range(K):
        for j in range(p):
            G[k, j] /= n
            if j < p - 1:
                loss += 0.5 * l2 * W[k, j] * W[k, j]
                G[k, j] += l2 * W[k, j]
    return loss, G


@njit(cache=True)
def _fit(Xb, y, K, epochs, lr, l2):
    W = np.zeros((K, Xb.shape[1]))
    for _ in range(epochs):
        _, G = _loss_grad(W, Xb, y, l2)
        W -= lr * G
    return W


def _with_bias(Z: np.ndarray) -> np.ndarray:
    return np.hstack((Z, np.ones((Z.shape[0], 1))))


@dataclass(frozen=True)
class PosteriorClassifier:
    num_classes: int
    num_features: int
    weights: np.ndarray  # (K, d + 1), last column is the bias
    mean: np.ndarray
    scale: np.ndarray
    meta: TrainingMeta | None = field(default=None, compare=False)

    def _check(self, X: np.ndarray) -> None:
        if X.shape[-1] != self.num_features:
            raise ValueError(f"expected {self.num_features} features, got {X.shape[-1]}")

    def scores(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        self._check(X)
        Z = (X - self.mean) / self.scale
        return Z @ self.weights[:, :-1].T + self.weights[:, -1]

    def predict_proba(self, X) -> np.ndarray:
        S = self.scores(X)
        S = S - S.max(axis=-1, keepdims=True)
        E = np.exp(S)
        return E / E.sum(axis=-1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.scores(X), axis=-1)

    def to_dict(self) -> dict:
        return {
            "num_classes": self.num_classes,
            "num_features": self.num_features,
            "weights": self.weights.tolist(),
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "meta": asdict(self.meta) if self.meta is not None else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "PosteriorClassifier":
        meta = TrainingMeta(**d["meta"]) if d.get("meta") else None
        return cls(int(d["num_classes"]), int(d["num_features"]),
                   np.asarray(d["weights"], dtype=float), np.asarray(d["mean"], dtype=float),
                   np.asarray(d["scale"], dtype=float), meta)

    @classmethod
    def from_json(cls, s: str) -> "PosteriorClassifier":
        return cls.from_dict(json.loads(s))


def train(window: LabeledWindow, config: TrainingConfig | None = None, seed: int = 0,
          num_classes: int | None = None) -> PosteriorClassifier:
    """Fit a multinomial logistic model on ``window``.

    ``num_classes`` defaults to ``max(label) + 1`` (at least 2).  Classes absent
    from the window keep near-floor posteriors since their scores are only
    ever pushed down.  The seed is recorded in the model metadata; the fit
    itself starts from zero weights and uses no randomness.
    """
    config = config or TrainingConfig()
    if len(window) == 0:
        raise ValueError("cannot train on an empty window")
    X, y = window.features, window.labels
    K = int(num_classes) if num_classes is not None else max(2, int(y.max()) + 1)
    if y.min() < 0 or y.max() >= K:
        raise ValueError("labels outside [0, num_classes)")
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Xb = _with_bias((X - mean) / scale)
    W = _fit(Xb, y, K, int(config.epochs), float(config.learning_rate), float(config.l2))
    meta = TrainingMeta(len(window), config.epochs, config.learning_rate, config.l2, int(seed))
    return PosteriorClassifier(K, X.shape[1], W, mean, scale, meta)


def predict_posterior(model: PosteriorClassifier, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("x must be a single feature vector")
    return model.predict_proba(x)


def label_encoding_of(posterior) -> np.ndarray:
    """1-of-K encoding of the argmax class; ties go to the lowest index."""
    p = np.asarray(posterior, dtype=float)
    onehot = np.zeros_like(p)
    onehot[int(np.argmax(p))] = 1.0
    return onehot


def uncertainty(posterior) -> float:
    """Euclidean distance between the 1-of-K decision and the posterior.

    Lies in ``[0, sqrt((K - 1) / K)]``.
    """
    p = np.asarray(posterior, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("posterior must be a vector of length K >= 2")
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-6:
        raise ValueError("posterior is not a probability vector")
    return float(np.linalg.norm(label_encoding_of(p) - p))


def uncertainty_bound(num_classes: int) -> float:
    return math.sqrt((num_classes - 1) / num_classes)


def zero_one_loss(model: PosteriorClassifier, data: LabeledWindow) -> float:
    if len(data) == 0:
        raise ValueError("empty data")
    return float(np.mean(model.predict(data.features) != data.labels))
