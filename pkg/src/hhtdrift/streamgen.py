"""Synthetic labeled streams with known abrupt drift points, plus CSV I/O.

Every generator is a pure function of its :class:`StreamSpec`: the same spec
(seed included) always yields the same arrays.

``moving_gaussians``
    Two (or more) Gaussian classes laid out along one attribute axis.  At
    every boundary the layout turns to the next axis and the segment
    centroid moves ``jump`` along that new axis.  The new samples therefore
    sit on the previous decision boundary, so both ``P(X)`` and ``P(y|X)``
    change.
``label_rotation``
    ``K`` fixed Gaussian clusters on a circle; only the cluster-to-label map
    is rotated at each boundary, so ``P(X)`` never changes.
``stationary``
    One concept, no drift.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .oracle import LabeledStream

KINDS = ("moving_gaussians", "label_rotation", "stationary")


@dataclass(frozen=True)
class StreamSpec:
    kind: str = "moving_gaussians"
    length: int = 5000
    segments: int = 5
    d: int = 2
    K: int = 2
    noise: float = 1.0
    seed: int = 0
    jump: float = 4.0
    separation: float = 3.0
    boundaries: tuple[int, ...] | None = field(default=None)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown stream kind {self.kind!r}; expected one of {KINDS}")
        if self.length < 0 or self.segments < 1 or self.d < 1 or self.K < 2:
            raise ValueError("invalid stream dimensions")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        if self.kind == "moving_gaussians" and self.d < 2:
            raise ValueError("moving_gaussians needs d >= 2")
        if self.boundaries is not None:
            b = tuple(int(v) for v in self.boundaries)
            if list(b) != sorted(set(b)) or (b and (b[0] <= 0 or b[-1] >= self.length)):
                raise ValueError("boundaries must be increasing and inside the stream")
            object.__setattr__(self, "boundaries", b)

    @property
    def true_drifts(self) -> list[int]:
        if self.kind == "stationary":
            return []
        if self.boundaries is not None:
            return list(self.boundaries)
        return [self.length * k // self.segments for k in range(1, self.segments)]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["boundaries"] = list(self.boundaries) if self.boundaries is not None else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StreamSpec":
        d = dict(d)
        if d.get("boundaries") is not None:
            d["boundaries"] = tuple(d["boundaries"])
        return cls(**d)


def _segment_ids(spec: StreamSpec) -> np.ndarray:
    seg = np.zeros(spec.length, dtype=np.int64)
    for b in spec.true_drifts:
        seg[b:] += 1
    return seg


def _balanced_labels(rng: np.random.Generator, seg: np.ndarray, K: int) -> np.ndarray:
    """Class indices balanced to within one inside every segment."""
    y = np.empty(seg.size, dtype=np.int64)
    for k in np.unique(seg):
        idx = np.flatnonzero(seg == k)
        y[idx] = rng.permutation(np.arange(idx.size) % K)
    return y


def _class_offsets(K: int, separation: float) -> np.ndarray:
    # K = 2 gives -separation, +separation
    return (np.arange(K) - (K - 1) / 2) * (2 * separation / max(K - 1, 1))


def segment_centroids(spec: StreamSpec) -> np.ndarray:
    """Mixture centroid of each segment of a moving-Gaussian stream."""
    n_seg = len(spec.true_drifts) + 1
    c = np.zeros((n_seg, spec.d))
    for k in range(1, n_seg):
        c[k] = c[k - 1]
        c[k, k % 2] += spec.jump
    return c


def gen_moving_gaussians(spec: StreamSpec) -> LabeledStream:
    if spec.kind != "moving_gaussians":
        spec = StreamSpec(**{**spec.to_dict(), "kind": "moving_gaussians",
                             "boundaries": spec.boundaries})
    rng = np.random.default_rng(spec.seed)
    seg = _segment_ids(spec)
    y = _balanced_labels(rng, seg, spec.K)
    centroids = segment_centroids(spec)
    offsets = _class_offsets(spec.K, spec.separation)
    mu = centroids[seg].copy()
    mu[np.arange(spec.length), seg % 2] += offsets[y]
    X = mu + spec.noise * rng.standard_normal((spec.length, spec.d))
    return LabeledStream(X, y, spec.K, spec.true_drifts, {"spec": spec.to_dict()})


def gen_label_rotation(spec: StreamSpec) -> LabeledStream:
    rng = np.random.default_rng(spec.seed)
    seg = _segment_ids(spec)
    K = spec.K
    cluster = _balanced_labels(rng, seg, K)
    angles = 2 * np.pi * np.arange(K) / K + np.pi / K
    radius = spec.separation * np.sqrt(2.0)
    centers = np.zeros((K, spec.d))
    centers[:, 0] = radius * np.cos(angles)
    if spec.d > 1:
        centers[:, 1] = radius * np.sin(angles)
    X = centers[cluster] + spec.noise * rng.standard_normal((spec.length, spec.d))
    y = (cluster + seg) % K
    return LabeledStream(X, y, K, spec.true_drifts, {"spec": spec.to_dict()})


def gen_stationary(spec: StreamSpec) -> LabeledStream:
    rng = np.random.default_rng(spec.seed)
    y = _balanced_labels(rng, np.zeros(spec.length, dtype=np.int64), spec.K)
    mu = np.zeros((spec.length, spec.d))
    mu[:, 0] = _class_offsets(spec.K, spec.separation)[y]
    X = mu + spec.noise * rng.standard_normal((spec.length, spec.d))
    return LabeledStream(X, y, spec.K, [], {"spec": spec.to_dict()})


GENERATORS = {
    "moving_gaussians": gen_moving_gaussians,
    "label_rotation": gen_label_rotation,
    "stationary": gen_stationary,
}


def generate(spec: StreamSpec) -> LabeledStream:
    return GENERATORS[spec.kind](spec)


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


class StreamFormatError(ValueError):
    pass


def write_csv(stream: LabeledStream, path, header: bool = True) -> None:
    """Write one row per sample: ``d`` feature columns, then the integer label."""
    path = Path(path)
    d = stream.dim
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"x{i}" for i in range(d)] + ["label"])
        for x, y in zip(stream.features, stream.labels):
            w.writerow([repr(float(v)) for v in x] + [int(y)])


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_csv(path, d: int | None = None, label_column: int = -1,
             num_classes: int | None = None) -> LabeledStream:
    """Read a stream written by :func:`write_csv` (or in the same layout).

    A first row containing any non-numeric cell is taken as a header.
    ``label_column`` indexes the label column (default: last); all other
    columns are features and must number ``d`` if given.
    """
    path = Path(path)
    rows: list[list[str]] = []
    with path.open(newline="") as fh:
        for row in csv.reader(fh):
            if row and any(c.strip() for c in row):
                rows.append(row)
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        return LabeledStream(np.empty((0, d or 0)), np.empty(0, dtype=np.int64), num_classes or 2)
    width = len(rows[0])
    if width < 2:
        raise StreamFormatError("row 1: need at least one feature column and a label column")
    lc = label_column % width if -width <= label_column < width else None
    if lc is None:
        raise StreamFormatError(f"label column {label_column} missing (rows have {width} columns)")
    if d is not None and width - 1 != d:
        raise StreamFormatError(f"expected {d} feature columns, found {width - 1}")
    X = np.empty((len(rows), width - 1))
    y = np.empty(len(rows), dtype=np.int64)
    for r, row in enumerate(rows, start=1):
        if len(row) != width:
            raise StreamFormatError(f"row {r}: expected {width} columns, got {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError as exc:
            raise StreamFormatError(f"row {r}: {exc}") from None
        lab = vals.pop(lc)
        if lab != int(lab) or lab < 0:
            raise StreamFormatError(f"row {r}: label {row[lc]!r} is not a class index")
        X[r - 1] = vals
        y[r - 1] = int(lab)
    K = num_classes if num_classes is not None else max(2, int(y.max()) + 1)
    return LabeledStream(X, y, K)


def manifest(stream: LabeledStream, spec: StreamSpec | None = None) -> dict:
    out = {
        "length": len(stream),
        "d": stream.dim,
        "num_classes": stream.num_classes,
        "true_drifts": list(stream.true_drifts),
    }
    if spec is not None:
        out["kind"] = spec.kind
        out["seed"] = spec.seed
        out["spec"] = spec.to_dict()
    return out


def write_stream(stream: LabeledStream, path, spec: StreamSpec | None = None) -> Path:
    """Write ``path`` (CSV) and its manifest ``path.with_suffix('.json')``."""
    path = Path(path)
    write_csv(stream, path)
    mpath = path.with_suffix(".json")
    mpath.write_text(json.dumps(manifest(stream, spec), indent=2, sort_keys=True) + "\n")
    return mpath


def read_stream(path) -> LabeledStream:
    """Load a CSV stream and, if present, its manifest's ground truth."""
    path = Path(path)
    mpath = path.with_suffix(".json")
    meta = json.loads(mpath.read_text()) if mpath.exists() else {}
    s = load_csv(path, d=meta.get("d"), num_classes=meta.get("num_classes"))
    s.true_drifts = list(meta.get("true_drifts", []))
    s.meta = meta
    return s
