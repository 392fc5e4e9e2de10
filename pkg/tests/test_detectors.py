import numpy as np
import pytest

from hhtdrift.classifier import LabeledWindow, train, uncertainty_bound
from hhtdrift.detectors import DetectorStatus, HhtAg, HhtCu, derive_seed, hht_cu_layer2
from hhtdrift.harness import run_detector
from hhtdrift.oracle import LabeledStream, MeteredStream
from hhtdrift.streamgen import StreamSpec, generate

from .oracles import brute_cutoff_bounds

STABLE = DetectorStatus.STABLE


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(1, 2) == derive_seed(1, 2)
    assert len({derive_seed(1, k) for k in range(100)}) == 100


def test_cu_cutoff_matches_prefix_replay():
    rng = np.random.default_rng(0)
    us = np.concatenate([rng.uniform(0, 0.3, 300), rng.uniform(0.4, 0.7, 60)])
    det = HhtCu(theta1=0.01)
    det.range_width = uncertainty_bound(2)
    det.restart()
    expected = brute_cutoff_bounds(us, det.range_width, 0.01)
    fired = None
    for i, u in enumerate(us):
        if det.layer1_update(u) and fired is None:
            fired = i
        assert det.cut_bound == pytest.approx(expected[i], abs=1e-12)
        if fired is not None:
            break
    assert fired is not None and fired >= 300


def test_cu_layer1_quiet_on_constant_uncertainty():
    det = HhtCu()
    det.range_width = uncertainty_bound(3)
    det.restart()
    assert not any(det.layer1_update(0.2) for _ in range(2000))


def test_cu_warmup_and_no_extra_labels_on_stationary():
    st = generate(StreamSpec(kind="stationary", seed=11))
    run = run_detector(st, HhtCu(window=100), seed=0)
    assert all(e.status is STABLE and e.layer1_statistic is None for e in run.events[:100])
    if not run.potential:
        assert run.labels_used == 100


@pytest.mark.parametrize("factory", [HhtCu, HhtAg])
def test_confirmed_is_subset_of_potential(factory):
    for s in range(3):
        run = run_detector(generate(StreamSpec(seed=40 + s)), factory(window=100), seed=s)
        assert set(run.confirmed) <= set(run.potential)
        assert run.confirmed, "moving Gaussians should trigger at least one drift"


@pytest.mark.parametrize("factory", [HhtCu, HhtAg])
def test_runs_are_deterministic(factory):
    st = generate(StreamSpec(seed=77))
    a = run_detector(st, factory(window=100), seed=4)
    b = run_detector(st, factory(window=100), seed=4)
    assert a.confirmed == b.confirmed and a.potential == b.potential
    assert np.array_equal(a.predictions, b.predictions)
    assert [e.to_dict() for e in a.events] == [e.to_dict() for e in b.events]


def test_event_log_fields():
    run = run_detector(generate(StreamSpec(seed=8, length=1500)), HhtCu(window=100), seed=0)
    assert [e.t for e in run.events[:1500]] == list(range(1500))
    used = [e.labels_used_so_far for e in run.events]
    assert used == sorted(used) and used[0] == 100
    d = run.events[-1].to_dict()
    assert set(d) >= {"t", "status", "layer1_statistic", "labels_used_so_far"}


def test_predictions_cover_everything_after_the_training_window():
    st = generate(StreamSpec(seed=2))
    run = run_detector(st, HhtCu(window=100), seed=0)
    assert np.all(run.predictions[:100] == -1)
    assert np.all(run.predictions[100:] >= 0)


# Layer-II ---------------------------------------------------------------------

def _pool(rng, n=200, flip=False):
    X = rng.normal(size=(n, 2))
    y = (X[:, 0] > 0).astype(int)
    if flip:
        y[n // 2:] = 1 - y[n // 2:]
    return LabeledWindow(X, y)


def test_cu_layer2_flipped_labels_confirm():
    rng = np.random.default_rng(3)
    assert all(hht_cu_layer2(_pool(rng, flip=True), 0.01, 200, seed=s) for s in range(5))


def test_cu_layer2_untestable_and_constant_loss():
    X = np.random.default_rng(0).normal(size=(100, 2))
    assert not hht_cu_layer2(LabeledWindow(X, np.zeros(100, dtype=int)), 0.01, 100, num_classes=2)
    # identical items: every split gives the same loss, so p = 1
    same = LabeledWindow(np.ones((100, 2)), np.tile([0, 1], 50))
    assert not hht_cu_layer2(same, 0.01, 100)


def test_cu_deferred_candidate_is_resolved_at_finish():
    rng = np.random.default_rng(1)
    n = 600
    X = rng.normal(size=(n, 2))
    y = (X[:, 0] > 0).astype(int)
    y[540:] = 1 - y[540:]
    st = LabeledStream(X, y, 2)
    oracle = MeteredStream(st, lookahead=100)
    det = HhtCu(window=100)
    det.attach(oracle, train(oracle.request_labels(0, 100)), seed=0)
    for t, x in oracle:
        if t < 560:
            det.observe(t, x)
            continue
        det._pending = t
        det.potential.append(t)
        break
    late = det.finish()
    assert late and late[0].deferred and late[0].status is DetectorStatus.CONFIRMED
    assert late[0].t in det.confirmed
    assert det.finish() == []


def test_cu_deferred_candidate_too_close_to_the_end_is_dropped():
    st = generate(StreamSpec(seed=1, length=400))
    oracle = MeteredStream(st, lookahead=100)
    det = HhtCu(window=100, min_tail=30)
    det.attach(oracle, train(oracle.request_labels(0, 100)), seed=0)
    det._pending = 390
    assert det.finish() == [] and det.confirmed == []


def test_ag_virtual_drift_is_denied():
    # the features are rescaled but the labels stay independent of them
    rng = np.random.default_rng(6)
    denials = confirms = 0
    for s in range(5):
        X = rng.normal(size=(3000, 2))
        X[1500:] *= 3.0
        y = rng.integers(0, 2, 3000)
        run = run_detector(LabeledStream(X, y, 2, [1500]), HhtAg(window=100), seed=s)
        denials += run.layer2_denials
        confirms += len(run.confirmed)
    assert denials > confirms


def test_ag_without_layer2_confirms_every_potential():
    run = run_detector(generate(StreamSpec(seed=9)), HhtAg(window=100, layer2=False), seed=0)
    assert run.confirmed == run.potential and run.layer2_denials == 0


def test_ag_layer1_statistic_after_both_windows_fill():
    run = run_detector(generate(StreamSpec(kind="stationary", seed=3)), HhtAg(window=100), seed=0)
    stats = [e.layer1_statistic for e in run.events]
    assert all(v is None for v in stats[:199])
    assert all(v is None or 0 <= v <= 1 for v in stats)
    if not run.confirmed:
        assert all(v is not None for v in stats[199:len(run.predictions)])
