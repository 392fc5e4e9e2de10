"""Label-efficient concept-drift detection for data streams.

Two hierarchical detectors pair a cheap unsupervised test that runs on
every item with a labeled confirmation test that runs only on candidates:

* :class:`HhtCu` watches classification uncertainty.
* :class:`HhtAg` watches attribute-wise goodness of fit.

DDM, EDDM, HDDM and A-KS are included as reference detectors, together with
stream generators, a metered label oracle and an evaluation harness.
"""

from .baselines import AKS, DDM, EDDM, HDDM, SupervisedDetector, make_ddm, make_eddm, make_hddm
from .classifier import (
    LabeledWindow,
    PosteriorClassifier,
    TrainingConfig,
    label_encoding_of,
    predict_posterior,
    train,
    uncertainty,
    uncertainty_bound,
)
from .detectors import DetectorStatus, Event, HhtAg, HhtCu, StreamDetector, hht_cu_layer2
from .evaluation import (
    DetectionReport,
    build_report,
    default_range_grid,
    match_detections,
    nauc,
    prequential_accuracy,
    range_curves,
)
from .harness import ExperimentConfig, aggregate, make_detector, run_detector, run_matrix
from .oracle import LabeledStream, MeteredStream
from .stats import (
    RunningBoundedMean,
    UntestableError,
    hoeffding_epsilon,
    hoeffding_split_epsilon,
    ks2d_statistic,
    ks2d_two_sample,
    ks_two_sample,
    permutation_test,
)
from .streamgen import StreamSpec, generate, load_csv, write_csv

__version__ = "0.1.0"

__all__ = [
    "AKS", "DDM", "EDDM", "HDDM", "SupervisedDetector", "make_ddm", "make_eddm", "make_hddm",
    "LabeledWindow", "PosteriorClassifier", "TrainingConfig", "label_encoding_of",
    "predict_posterior", "train", "uncertainty", "uncertainty_bound",
    "DetectorStatus", "Event", "HhtAg", "HhtCu", "StreamDetector", "hht_cu_layer2",
    "DetectionReport", "build_report", "default_range_grid", "match_detections", "nauc",
    "prequential_accuracy", "range_curves",
    "ExperimentConfig", "aggregate", "make_detector", "run_detector", "run_matrix",
    "LabeledStream", "MeteredStream",
    "RunningBoundedMean", "UntestableError", "hoeffding_epsilon", "hoeffding_split_epsilon",
    "ks2d_statistic", "ks2d_two_sample", "ks_two_sample", "permutation_test",
    "StreamSpec", "generate", "load_csv", "write_csv",
]
