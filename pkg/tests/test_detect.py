import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from repmotion import synth
from repmotion.detect import (FilterConfig, classify_windows, filter_training_positives, merge_segments,
                              passes_filter, vote_smooth)
from repmotion.features import window_features
from repmotion.trajectory import slide_windows

from conftest import tone, traj_from


def windows_of(n, start=0):
    t = traj_from(np.zeros((150 + 30 * (n - 1), 2)), start=start)
    return slide_windows(t)


@pytest.mark.parametrize("labels,expected", [
    ([1, 0, 1], [1, 1, 1]),
    ([0, 0, 0, 0, 0], [0, 0, 0, 0, 0]),
    ([1, 1, 0, 0, 0, 1], [1, 1, 1, 0, 0, 0]),
    ([1, 1, 0, 0, 0, 1, 1], [1, 1, 1, 0, 0, 0, 1]),
])
def test_tiled_vote(labels, expected):
    assert vote_smooth(labels).tolist() == expected


def test_sliding_vote():
    assert vote_smooth([0, 1, 0, 1, 1, 0, 0], mode="sliding").tolist() == [0, 0, 1, 1, 1, 0, 0]


@given(st.lists(st.integers(0, 1), max_size=40), st.sampled_from([1, 3, 5]), st.sampled_from(["tiled", "sliding"]))
def test_vote_keeps_length_and_constant_runs(labels, k, mode):
    out = vote_smooth(labels, k, mode)
    assert len(out) == len(labels)
    if labels and len(set(labels)) == 1:
        assert out.tolist() == labels


def test_vote_rejects_even_k():
    with pytest.raises(ValueError):
        vote_smooth([1, 0], k=2)


def test_merge_all_positive():
    wins = windows_of(5, start=10)
    segs = merge_segments([1] * 5, wins)
    assert len(segs) == 1
    assert (segs[0].start_frame, segs[0].end_frame) == (10, 10 + 150 + 4 * 30 - 1)
    assert segs[0].windows == (0, 1, 2, 3, 4)


def test_merge_raw_alternating():
    segs = merge_segments([1, 0, 1], windows_of(3), [0.8, 0.1, 0.6])
    assert [s.windows for s in segs] == [(0,), (2,)]
    assert [s.label_confidence for s in segs] == [0.8, 0.6]


def test_merge_all_negative():
    assert merge_segments([0, 0, 0], windows_of(3)) == []


def _first_window(kind, seed):
    spec = synth.sample_spec(kind, np.random.default_rng(seed))
    return window_features(slide_windows(synth.generate(spec)[0])[0])


def test_filter_keeps_clean_sinusoid_drops_random_walk():
    cfg = FilterConfig()
    clean = window_features(slide_windows(traj_from(np.column_stack([40 * tone(1.0), np.zeros(150)])))[0])
    assert clean["ac_max_peak"] > 0.95 and passes_filter(clean, cfg)
    walks = [_first_window("random_walk", s) for s in range(20)]
    assert sum(passes_filter(w, cfg) for w in walks) <= 2
    assert filter_training_positives([]) == []


def test_classify_empty(bundle):
    assert classify_windows(bundle.detector, []).shape == (0,)


def test_detector_separates_sinusoids_and_walks(bundle):
    rng = np.random.default_rng(11)
    sines, walks = [], []
    for _ in range(20):
        s = synth.generate(synth.sample_spec("sinusoid_x", rng))[0]
        sines += [window_features(w) for w in slide_windows(s)]
        r = synth.generate(synth.sample_spec("random_walk", rng))[0]
        walks += [window_features(w) for w in slide_windows(r)]
    assert classify_windows(bundle.detector, sines).mean() >= 0.9
    assert classify_windows(bundle.detector, walks).mean() <= 0.1
