"""Scoring detector runs against ground-truth drift points."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np


def _check_sorted(seq, name):
    if any(b < a for a, b in zip(seq, seq[1:])):
        raise ValueError(f"{name} must be sorted ascending")


def match_detections(true_drifts, detected, delay_range: int):
    """Greedy earliest matching of detections to true drifts.

    A true drift ``t*`` is hit by the first still-unmatched detection in
    ``(t*, t* + delay_range]``.  Every other detection, whether outside all
    windows or a second one inside a matched window, is a false positive.

    Returns ``(tp, fp, fn, delays)``.
    """
    true_drifts = list(true_drifts)
    detected = list(detected)
    _check_sorted(true_drifts, "true_drifts")
    _check_sorted(detected, "detected")
    if delay_range < 1:
        raise ValueError("delay_range must be positive")
    used = [False] * len(detected)
    delays = []
    j0 = 0
    for t in true_drifts:
        while j0 < len(detected) and detected[j0] <= t:
            j0 += 1
        for j in range(j0, len(detected)):
            if detected[j] > t + delay_range:
                break
            if not used[j]:
                used[j] = True
                delays.append(detected[j] - t)
                break
    tp = len(delays)
    return tp, len(detected) - tp, len(true_drifts) - tp, delays


def default_range_grid(window: int, points: int = 20) -> list[int]:
    """``points`` evenly spaced delay ranges from ``window / 2`` to ``5 * window``."""
    grid = np.linspace(window / 2, 5 * window, points)
    return sorted({max(1, int(round(v))) for v in grid})


def range_curves(true_drifts, detected, range_grid):
    """Precision and recall at each delay range; precision is 0 with no detections."""
    precision, recall = [], []
    for r in range_grid:
        tp, fp, fn, _ = match_detections(true_drifts, detected, r)
        precision.append((r, tp / (tp + fp) if tp + fp else 0.0))
        recall.append((r, tp / (tp + fn) if tp + fn else 0.0))
    return precision, recall


def nauc(curve) -> float:
    """Trapezoidal area under ``[(range, value), ...]`` over the range span."""
    if not curve:
        raise ValueError("empty curve")
    xs = np.array([c[0] for c in curve], dtype=float)
    ys = np.array([c[1] for c in curve], dtype=float)
    if len(xs) == 1 or xs[-1] == xs[0]:
        return float(ys.mean())
    area = np.sum((xs[1:] - xs[:-1]) * (ys[1:] + ys[:-1]) / 2.0)
    return float(area / (xs[-1] - xs[0]))


def prequential_accuracy(predictions, labels) -> float:
    """Fraction of items whose prediction (made before any update that used
    the item) equals the true label."""
    p = np.asarray(predictions)
    y = np.asarray(labels)
    if p.shape != y.shape:
        raise ValueError("predictions and labels differ in length")
    return float(np.mean(p == y)) if p.size else 0.0


@dataclass
class DetectionReport:
    detector: str
    stream: str
    seed: int
    delay_range: int
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    mean_delay: float | None
    range_grid: list[int]
    tp_curve: list[int]
    fp_curve: list[int]
    fn_curve: list[int]
    precision_curve: list[float]
    recall_curve: list[float]
    nauc_precision: float
    nauc_recall: float
    accuracy: float
    label_fraction: float
    labels_used: int
    length: int
    true_drifts: list[int]
    confirmed: list[int]
    potential: list[int]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "DetectionReport":
        return cls(**d)

    def write_curve_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["range", "precision", "recall"])
            for r, p, q in zip(self.range_grid, self.precision_curve, self.recall_curve):
                w.writerow([r, repr(p), repr(q)])


def build_report(detector: str, stream: str, seed: int, true_drifts, confirmed, potential,
                 range_grid, delay_range: int, accuracy: float, labels_used: int,
                 length: int) -> DetectionReport:
    true_drifts = sorted(true_drifts)
    confirmed = sorted(confirmed)
    tp, fp, fn, delays = match_detections(true_drifts, confirmed, delay_range)
    counts = [match_detections(true_drifts, confirmed, r)[:3] for r in range_grid]
    pc, rc = range_curves(true_drifts, confirmed, range_grid)
    return DetectionReport(
        detector=detector,
        stream=stream,
        seed=int(seed),
        delay_range=int(delay_range),
        tp=tp,
        fp=fp,
        fn=fn,
        precision=tp / (tp + fp) if tp + fp else 0.0,
        recall=tp / (tp + fn) if tp + fn else 0.0,
        mean_delay=float(np.mean(delays)) if delays else None,
        range_grid=[int(r) for r in range_grid],
        tp_curve=[c[0] for c in counts],
        fp_curve=[c[1] for c in counts],
        fn_curve=[c[2] for c in counts],
        precision_curve=[v for _, v in pc],
        recall_curve=[v for _, v in rc],
        nauc_precision=nauc(pc),
        nauc_recall=nauc(rc),
        accuracy=float(accuracy),
        label_fraction=labels_used / length if length else 0.0,
        labels_used=int(labels_used),
        length=int(length),
        true_drifts=[int(t) for t in true_drifts],
        confirmed=[int(t) for t in confirmed],
        potential=sorted(int(t) for t in potential),
    )
