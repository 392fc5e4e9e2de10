import json

import numpy as np
import pytest

from hhtdrift.classifier import LabeledWindow, train
from hhtdrift.stats import ks_two_sample
from hhtdrift.streamgen import (
    StreamFormatError,
    StreamSpec,
    gen_label_rotation,
    gen_moving_gaussians,
    gen_stationary,
    generate,
    load_csv,
    read_stream,
    segment_centroids,
    write_csv,
    write_stream,
)


def test_equal_spacing():
    assert StreamSpec(segments=5, length=5000).true_drifts == [1000, 2000, 3000, 4000]
    assert generate(StreamSpec(kind="stationary")).true_drifts == []
    assert StreamSpec(boundaries=(10, 300), length=400).true_drifts == [10, 300]


@pytest.mark.parametrize("kw", [
    {"kind": "spiral"}, {"K": 1}, {"d": 0}, {"noise": -1.0}, {"segments": 0},
    {"kind": "moving_gaussians", "d": 1}, {"boundaries": (50, 10)}, {"length": 100, "boundaries": (100,)},
])
def test_invalid_specs(kw):
    with pytest.raises(ValueError):
        StreamSpec(**kw)


def test_centroid_jump_magnitude():
    spec = StreamSpec(jump=2.5)
    c = segment_centroids(spec)
    assert np.allclose(np.linalg.norm(np.diff(c, axis=0), axis=1), 2.5)
    s = gen_moving_gaussians(StreamSpec(jump=2.5, noise=0.0))
    seg_means = [s.features[a:a + 1000].mean(axis=0) for a in range(0, 5000, 1000)]
    assert np.allclose(seg_means, c, atol=1e-9)


@pytest.mark.parametrize("kind", ["moving_gaussians", "label_rotation", "stationary"])
def test_reproducible_and_balanced(kind):
    spec = StreamSpec(kind=kind, seed=42, K=2 if kind != "label_rotation" else 4)
    a, b = generate(spec), generate(spec)
    assert np.array_equal(a.features, b.features) and np.array_equal(a.labels, b.labels)
    counts = np.bincount(a.labels, minlength=spec.K)
    assert counts.max() - counts.min() <= 1
    c = generate(StreamSpec(kind=kind, seed=43, K=spec.K))
    assert not np.array_equal(a.features, c.features)


def test_boundary_shift_is_detectable():
    # 1.5 standard deviations of jump, 200 samples either side of the boundary
    hits = 0
    seeds = range(100)
    for s in seeds:
        st = gen_moving_gaussians(StreamSpec(seed=s, jump=1.5))
        rx = [ks_two_sample(st.features[800:1000, k], st.features[1000:1200, k], 0.001).reject
              for k in range(2)]
        hits += any(rx)
    assert hits / len(seeds) >= 0.95


def test_label_rotation_keeps_feature_distribution():
    alpha, rejects, tests = 0.01, 0, 0
    for s in range(50):
        st = gen_label_rotation(StreamSpec(kind="label_rotation", K=4, seed=s))
        for b in st.true_drifts:
            for k in range(st.dim):
                rejects += ks_two_sample(st.features[b - 200:b, k], st.features[b:b + 200, k], alpha).reject
                tests += 1
    assert rejects / tests <= alpha + 3 * np.sqrt(alpha * (1 - alpha) / tests)


def test_label_rotation_breaks_a_frozen_classifier():
    st = gen_label_rotation(StreamSpec(kind="label_rotation", K=4, seed=1))
    assert len(st.true_drifts) == 4
    for b in st.true_drifts:
        m = train(LabeledWindow(st.features[b - 500:b], st.labels[b - 500:b]), num_classes=4)
        before = np.mean(m.predict(st.features[b - 500:b]) == st.labels[b - 500:b])
        after = np.mean(m.predict(st.features[b:b + 500]) == st.labels[b:b + 500])
        assert before > 0.9 and after < 0.2


def test_stationary_null_and_accuracy():
    alpha, rejects = 0.01, 0
    accs = []
    for s in range(100):
        st = gen_stationary(StreamSpec(kind="stationary", seed=s))
        rejects += ks_two_sample(st.features[:200, 0], st.features[200:400, 0], alpha).reject
        m = train(LabeledWindow(st.features[:100], st.labels[:100]))
        hit = m.predict(st.features[100:]) == st.labels[100:]
        accs.append([hit[:2450].mean(), hit[2450:].mean()])
    assert rejects / 100 <= alpha + 3 * np.sqrt(alpha * (1 - alpha) / 100)
    first, second = np.array(accs).T
    # binomial noise of ~2450 trials per half
    assert np.abs(first - second).max() < 4 * np.sqrt(0.25 / 2450) * 2


def test_csv_round_trip(tmp_path):
    st = generate(StreamSpec(seed=3, length=300))
    path = tmp_path / "s.csv"
    write_csv(st, path)
    back = load_csv(path)
    assert np.array_equal(back.features, st.features)
    assert np.array_equal(back.labels, st.labels)
    write_csv(st, path, header=False)
    assert np.array_equal(load_csv(path, d=2).features, st.features)


def test_stream_manifest(tmp_path):
    spec = StreamSpec(seed=5, length=500)
    st = generate(spec)
    mpath = write_stream(st, tmp_path / "mg.csv", spec)
    meta = json.loads(mpath.read_text())
    assert meta["true_drifts"] == [100, 200, 300, 400]
    assert meta["kind"] == "moving_gaussians" and meta["seed"] == 5
    back = read_stream(tmp_path / "mg.csv")
    assert back.true_drifts == [100, 200, 300, 400]


def test_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x0,label\n1.0,0\n2.0\n")
    with pytest.raises(StreamFormatError, match="row 2"):
        load_csv(p)
    p.write_text("1.0,0\nabc,1\n")
    with pytest.raises(StreamFormatError, match="row 2"):
        load_csv(p)
    p.write_text("1.0\n2.0\n")
    with pytest.raises(StreamFormatError):
        load_csv(p)
    p.write_text("1.0,2.0,0\n")
    with pytest.raises(StreamFormatError):
        load_csv(p, d=1)
    p.write_text("1.0,0.5\n")
    with pytest.raises(StreamFormatError, match="class index"):
        load_csv(p)
    p.write_text("1.0,0\n")
    with pytest.raises(StreamFormatError):
        load_csv(p, label_column=5)


def test_empty_csv(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    assert len(load_csv(p)) == 0
    p.write_text("x0,x1,label\n")
    assert len(load_csv(p, d=2)) == 0


def test_label_column_choice(tmp_path):
    p = tmp_path / "first.csv"
    p.write_text("label,a,b\n1,0.5,0.25\n0,1.5,2.5\n")
    st = load_csv(p, label_column=0)
    assert st.labels.tolist() == [1, 0]
    assert st.features.tolist() == [[0.5, 0.25], [1.5, 2.5]]
