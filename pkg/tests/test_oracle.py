import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hhtdrift.oracle import LabeledStream, MeteredStream


def stream(n=30, d=2):
    rng = np.random.default_rng(0)
    return LabeledStream(rng.normal(size=(n, d)), np.arange(n) % 2, 2)


def test_next_walks_the_stream():
    ms = MeteredStream(stream(3))
    assert [ms.next()[0] for _ in range(3)] == [0, 1, 2]
    assert ms.next() is None
    assert ms.cursor == 3


def test_empty_stream_ends_immediately():
    ms = MeteredStream(LabeledStream(np.zeros((0, 2)), np.zeros(0), 2))
    assert ms.next() is None
    assert list(ms) == []
    assert ms.label_fraction == 0.0


def test_iteration_yields_features_in_order():
    s = stream(5)
    out = list(MeteredStream(s))
    assert [t for t, _ in out] == list(range(5))
    assert np.array_equal(np.array([x for _, x in out]), s.features)


def test_rerequest_is_not_double_counted():
    ms = MeteredStream(stream(), lookahead=10)
    ms.request_labels(0, 10)
    ms.request_labels(0, 10)
    assert ms.labels_used == 10


def test_disjoint_requests_add_up():
    ms = MeteredStream(stream(), lookahead=10)
    ms.request_labels(0, 5)
    ms.request_labels(5, 10)
    assert ms.labels_used == 10
    assert ms.label_fraction == pytest.approx(10 / 30)


def test_two_window_request_around_a_candidate():
    N = 5
    ms = MeteredStream(stream(), lookahead=N)
    for _ in range(13):
        t, _ = ms.next()
    w = ms.request_labels(t - N, t + N)
    assert ms.labels_used == 2 * N
    assert w.start == t - N and len(w) == 2 * N
    assert np.array_equal(w.labels, stream().labels[t - N:t + N])


@pytest.mark.parametrize("i,j", [(-1, 3), (3, 3), (5, 2), (0, 31)])
def test_out_of_range_requests(i, j):
    ms = MeteredStream(stream(), lookahead=100)
    with pytest.raises(IndexError):
        ms.request_labels(i, j)


def test_lookahead_limits_future_labels():
    ms = MeteredStream(stream(), lookahead=3)
    ms.next()
    assert ms.check_range(0, 4)
    assert not ms.check_range(0, 5)


@given(st.lists(st.tuples(st.integers(0, 29), st.integers(1, 10)), max_size=20))
def test_meter_equals_revealed_set(requests):
    ms = MeteredStream(stream(), lookahead=30)
    seen = set()
    last = 0.0
    for i, width in requests:
        j = min(30, i + width)
        ms.request_labels(i, j)
        seen.update(range(i, j))
        assert ms.label_fraction >= last
        last = ms.label_fraction
    assert ms.labels_used == len(seen)
    assert ms.revealed_indices().tolist() == sorted(seen)
