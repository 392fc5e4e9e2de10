"""Experiment orchestration: build detectors, drive them over streams, score.

A run is one ``(stream, detector, seed)`` triple.  The harness meters the
first ``N`` labels to train the initial classifier, feeds every item to the
detector, records the prediction made for each item before any update that
used it, and turns the result into a :class:`DetectionReport`.
"""

from __future__ import annotations

import json
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import AKS, make_ddm, make_eddm, make_hddm
from .classifier import TrainingConfig, train
from .detectors import DetectorStatus, Event, HhtAg, HhtCu, StreamDetector, derive_seed
from .evaluation import DetectionReport, build_report, default_range_grid, prequential_accuracy
from .oracle import LabeledStream, MeteredStream
from .streamgen import StreamSpec, generate, read_stream

logger = logging.getLogger(__name__)

# significance levels and thresholds per detector
DEFAULTS: dict[str, dict] = {
    "HHT-CU": {"theta1": 0.01, "theta2": 0.01, "permutations": 500},
    "HHT-AG": {"theta1": 0.001, "theta2": 0.001, "permutations": 2000},
    "A-KS": {"theta": 0.001},
    "DDM": {"alpha": 3.0, "beta": 2.0},
    "EDDM": {"alpha": 0.95, "beta": 0.90},
    "HDDM": {"alpha_w": 0.005, "alpha_d": 0.001},
}

_FACTORIES = {
    "HHT-CU": HhtCu,
    "HHT-AG": HhtAg,
    "A-KS": AKS,
    "DDM": make_ddm,
    "EDDM": make_eddm,
    "HDDM": make_hddm,
}


def canonical_name(name: str) -> str:
    key = name.upper().replace("_", "-")
    if key == "AKS":
        key = "A-KS"
    if key.replace("-", "") in {"HHTCU", "HHTAG"}:
        key = key.replace("-", "")
        key = key[:3] + "-" + key[3:]
    if key not in _FACTORIES:
        raise KeyError(f"unknown detector {name!r}; known: {sorted(_FACTORIES)}")
    return key


def make_detector(name: str, window: int, params: dict | None = None,
                  training: TrainingConfig | None = None) -> StreamDetector:
    key = canonical_name(name)
    kwargs = {**DEFAULTS[key], **(params or {})}
    return _FACTORIES[key](window=window, training=training, **kwargs)


@dataclass
class RunResult:
    detector: str
    stream: str
    seed: int
    events: list[Event]
    potential: list[int]
    confirmed: list[int]
    predictions: np.ndarray
    labels_used: int
    label_fraction: float
    accuracy: float
    true_drifts: list[int] = field(default_factory=list)
    length: int = 0
    layer2_denials: int = 0


def run_detector(stream: LabeledStream, detector: StreamDetector, seed: int = 0,
                 stream_name: str = "stream", keep_events: bool = True) -> RunResult:
    """Drive ``detector`` over ``stream`` and collect its outputs."""
    n_init = detector.window
    if len(stream) <= n_init:
        raise ValueError(f"stream of length {len(stream)} is shorter than the window {n_init}")
    oracle = MeteredStream(stream, lookahead=n_init)
    init = oracle.request_labels(0, n_init)
    model = train(init, detector.training, seed=derive_seed(seed, 0), num_classes=stream.num_classes)
    detector.attach(oracle, model, seed=seed)

    preds = np.full(len(stream), -1, dtype=np.int64)
    events: list[Event] = []
    for t, x in oracle:
        if t >= n_init:
            preds[t] = detector.predict(t, x)
        status = detector.observe(t, x)
        if keep_events:
            events.append(Event(t, status, detector.last_statistic, oracle.labels_used))
    late = detector.finish()
    if keep_events:
        events.extend(late)
    acc = prequential_accuracy(preds[n_init:], stream.labels[n_init:])
    return RunResult(
        detector=detector.name,
        stream=stream_name,
        seed=int(seed),
        events=events,
        potential=list(detector.potential),
        confirmed=sorted(detector.confirmed),
        predictions=preds,
        labels_used=oracle.labels_used,
        label_fraction=oracle.label_fraction,
        accuracy=acc,
        true_drifts=list(stream.true_drifts),
        length=len(stream),
        layer2_denials=getattr(detector, "layer2_denials", 0),
    )


def report_for(run: RunResult, range_grid, delay_range: int) -> DetectionReport:
    return build_report(run.detector, run.stream, run.seed, run.true_drifts, run.confirmed,
                        run.potential, range_grid, delay_range, run.accuracy, run.labels_used,
                        run.length)


# --------------------------------------------------------------------------
# Experiment configuration
# --------------------------------------------------------------------------


@dataclass
class DetectorEntry:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class StreamEntry:
    name: str
    spec: StreamSpec | None = None
    path: str | None = None


@dataclass
class ExperimentConfig:
    streams: list[StreamEntry]
    detectors: list[DetectorEntry]
    seeds: list[int]
    window: int = 100
    range_grid: list[int] | None = None
    delay_range: int | None = None
    training: TrainingConfig = field(default_factory=TrainingConfig)
    output: str | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.window < 2:
            raise ValueError("window must be >= 2")
        for d in self.detectors:
            d.name = canonical_name(d.name)
        if self.range_grid is None:
            self.range_grid = default_range_grid(self.window)
        self.range_grid = sorted(int(r) for r in self.range_grid)
        if self.delay_range is None:
            self.delay_range = 5 * self.window
        if not self.seeds:
            raise ValueError("at least one seed is required")

    @classmethod
    def from_dict(cls, d: dict, seed_count: int | None = None) -> "ExperimentConfig":
        d = dict(d)
        window = int(d.get("window", d.get("N", 100)))
        streams = []
        for i, s in enumerate(d.get("streams", [])):
            s = dict(s)
            name = s.pop("name", None)
            path = s.pop("path", None)
            if path is not None:
                streams.append(StreamEntry(name or Path(path).stem, None, str(path)))
            else:
                spec = StreamSpec.from_dict(s)
                streams.append(StreamEntry(name or f"{spec.kind}_{i}", spec))
        if not streams:
            raise ValueError("config lists no streams")
        dets = []
        for e in d.get("detectors", []):
            if isinstance(e, str):
                dets.append(DetectorEntry(e))
            else:
                e = dict(e)
                dets.append(DetectorEntry(e.pop("name"), e.pop("params", e)))
        if not dets:
            raise ValueError("config lists no detectors")
        seeds = d.get("seeds", 1)
        if seed_count is not None:
            seeds = seed_count
        seeds = list(range(int(seeds))) if isinstance(seeds, int) else [int(s) for s in seeds]
        training = TrainingConfig(**d.get("training", {}))
        return cls(streams, dets, seeds, window, d.get("range_grid"), d.get("delay_range"),
                   training, d.get("output"), int(d.get("workers", 1)))


def materialize_stream(entry: StreamEntry, seed: int) -> LabeledStream:
    """Stream for Monte-Carlo seed ``seed``.

    Generated streams are re-seeded from ``(spec.seed, seed)``; CSV streams are
    fixed data and ignore the seed.
    """
    if entry.path is not None:
        return read_stream(entry.path)
    spec = entry.spec
    mc = StreamSpec.from_dict({**spec.to_dict(), "seed": derive_seed(spec.seed, seed) % (2**63)})
    return generate(mc)


def _detector_seed(name: str, seed: int) -> int:
    return derive_seed(seed, zlib.crc32(name.encode()))


@dataclass(frozen=True)
class Task:
    stream: StreamEntry
    detector: DetectorEntry
    seed: int
    window: int
    training: TrainingConfig
    range_grid: tuple[int, ...]
    delay_range: int
    out_dir: str | None = None


def run_task(task: Task) -> DetectionReport:
    stream = materialize_stream(task.stream, task.seed)
    det = make_detector(task.detector.name, task.window, task.detector.params, task.training)
    run = run_detector(stream, det, _detector_seed(det.name, task.seed), task.stream.name,
                       keep_events=task.out_dir is not None)
    rep = report_for(run, list(task.range_grid), task.delay_range)
    rep.seed = task.seed
    if task.out_dir is not None:
        write_run(Path(task.out_dir), run, rep)
    return rep


def run_id(stream: str, detector: str, seed: int) -> str:
    return f"{stream}__{detector}__seed{seed:04d}"


def write_run(out_dir: Path, run: RunResult, rep: DetectionReport) -> None:
    rid = run_id(rep.stream, rep.detector, rep.seed)
    runs = out_dir / "runs"
    runs.mkdir(parents=True, exist_ok=True)
    with (runs / f"{rid}.events.ndjson").open("w") as fh:
        for e in run.events:
            fh.write(json.dumps(e.to_dict(), sort_keys=True) + "\n")
    (runs / f"{rid}.report.json").write_text(rep.to_json() + "\n")
    rep.write_curve_csv(runs / f"{rid}.curve.csv")


def tasks_for(config: ExperimentConfig, out_dir: str | None = None) -> list[Task]:
    return [
        Task(s, d, seed, config.window, config.training, tuple(config.range_grid),
             config.delay_range, out_dir)
        for s in config.streams
        for d in config.detectors
        for seed in config.seeds
    ]


def run_matrix(config: ExperimentConfig, out_dir: str | None = None,
               workers: int | None = None) -> list[DetectionReport]:
    """Run every ``(stream, detector, seed)`` combination; results keep task order."""
    tasks = tasks_for(config, out_dir)
    workers = config.workers if workers is None else workers
    if workers <= 1:
        return [run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(run_task, tasks, chunksize=1))


# --------------------------------------------------------------------------
# Aggregation
# --------------------------------------------------------------------------

AGG_FIELDS = ("nauc_precision", "nauc_recall", "precision", "recall", "label_fraction", "accuracy")


def aggregate(reports: list[DetectionReport]) -> list[dict]:
    """Mean of the per-run metrics for each ``(stream, detector)`` pair."""
    groups: dict[tuple[str, str], list[DetectionReport]] = {}
    for r in reports:
        groups.setdefault((r.stream, r.detector), []).append(r)
    rows = []
    for (stream, det), reps in sorted(groups.items()):
        row = {"stream": stream, "detector": det, "runs": len(reps)}
        for f in AGG_FIELDS:
            row[f] = float(np.mean([getattr(r, f) for r in reps]))
        delays = [r.mean_delay for r in reps if r.mean_delay is not None]
        row["mean_delay"] = float(np.mean(delays)) if delays else None
        row["confirmed_per_run"] = float(np.mean([len(r.confirmed) for r in reps]))
        rows.append(row)
    return rows


def mean_curves(reports: list[DetectionReport]) -> tuple[list[int], np.ndarray, np.ndarray]:
    """Seed-averaged precision and recall curves of reports sharing one grid."""
    grid = reports[0].range_grid
    if any(r.range_grid != grid for r in reports):
        raise ValueError("reports use different range grids")
    P = np.mean([r.precision_curve for r in reports], axis=0)
    R = np.mean([r.recall_curve for r in reports], axis=0)
    return grid, P, R
