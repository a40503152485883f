"""Acceptance suite: one PASS/FAIL line per criterion.

The lines are collected and printed in the pytest terminal summary; add
``-s`` to also see each one as its test finishes.
"""
import json
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from repmotion import dsp, synth
from repmotion.analytics import count_reps, recognize
from repmotion.cli import main as cli_main
from repmotion.cluster import cluster_segments, connected_components
from repmotion.features import extract_features
from repmotion.io import validate_report
from repmotion.nn import TrainConfig, check_architectures
from repmotion.training import (Example, detection_metrics, detector_config, single_cluster, train_detector,
                                train_recognizer, train_regressor)
from repmotion.trajectory import ExerciseSegment, TrajectoryWindow

sys.path.insert(0, str(Path(__file__).parent))
from conftest import ACCEPTANCE_LINES  # noqa: E402
from test_cluster import closure_components  # noqa: E402


def report(n: int, name: str, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {n} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def examples(items):
    return [Example(it.trajectory, it.truth.is_exercise, it.truth.reps,
                    it.truth.label if it.truth.is_exercise else None) for it in items]


# 1 ----------------------------------------------------------------------------


def test_gradient_check():
    t0 = time.perf_counter()
    errors = check_architectures(seed=0)
    elapsed = time.perf_counter() - t0
    worst = max(errors.values())
    ok = worst <= 1e-4 and elapsed < 30
    report(1, "gradient check", ok, ", ".join(f"{k} {v:.1e}" for k, v in errors.items()) + f", {elapsed:.1f} s")
    assert ok


# 2 ----------------------------------------------------------------------------


def test_dominant_frequency_fidelity():
    fps, seconds = 30.0, 5.0
    t = np.arange(int(fps * seconds)) / fps
    hits = {}
    for f in (0.5, 1.0, 1.5, 2.0):
        rng = np.random.default_rng(int(f * 100))
        good = 0
        for _ in range(100):
            amp = rng.uniform(5, 50)
            x = amp * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi)) + rng.normal(0, 0.05 * amp, t.shape)
            good += abs(dsp.dominant_frequency(x, fps).hz - f) <= 0.2 + 1e-9
        hits[f] = good
    ok = all(v >= 99 for v in hits.values())
    report(2, "dominant frequency", ok, ", ".join(f"{f:g} Hz {v}/100" for f, v in hits.items()))
    assert ok


# 3 ----------------------------------------------------------------------------


def test_detection():
    corpus = synth.generate_corpus(200, synth.DETECTION_CLASSES, seed=101)
    t0 = time.perf_counter()
    model = train_detector(examples(corpus.train), detector_config(TrainConfig(seed=101)))
    elapsed = time.perf_counter() - t0
    m = detection_metrics(model, examples(corpus.test))
    ok = m["accuracy"] >= 0.95 and m["false_positive_rate"] <= m["false_negative_rate"] and elapsed < 120
    report(3, "detection", ok, f"held-out accuracy {m['accuracy']:.3f}, FPR {m['false_positive_rate']:.3f}, "
                               f"FNR {m['false_negative_rate']:.3f}, {m['n']} windows, train {elapsed:.1f} s")
    assert ok


# 4 ----------------------------------------------------------------------------

SWEEP = {k: synth.ParamRanges(frequency=(0.4, 2.0), duration=(5.0, 11.0), noise=(0.0, 0.1),
                              drift=synth.DEFAULT_RANGES[k].drift) for k in synth.EXERCISE_KINDS}


def test_rep_counting():
    corpus = synth.generate_corpus(100, synth.RECOGNITION_CLASSES, seed=202, ranges=SWEEP)
    train = [(single_cluster(it.trajectory), it.truth.reps) for it in corpus.train]
    model = train_regressor([c for c, _ in train], [r for _, r in train], TrainConfig(seed=202))
    errors = []
    for it in corpus.test:
        est = count_reps(model, single_cluster(it.trajectory))
        errors.append(abs(est.value - it.truth.reps) if est.counted else it.truth.reps)
    mae = float(np.mean(errors))
    ok = len(errors) == 100 and mae <= 1.7
    report(4, "rep counting", ok, f"MAE {mae:.2f} reps over {len(errors)} held-out cases, "
                                  f"max {max(errors):.2f}, std {np.std(errors):.2f}")
    assert ok


# 5 ----------------------------------------------------------------------------


def _phase_split_clusters(offset, seed):
    scene = synth.phase_split_scene(offset, seed)
    segs = [ExerciseSegment(t.id, t.start_frame, t.end_frame, (0,), 1.0) for t in scene.trajectories]
    return len(cluster_segments(segs, {t.id: t for t in scene.trajectories}, scene.boxes))


def test_clustering():
    rng = np.random.default_rng(303)
    graph_ok = 0
    for _ in range(1000):
        n = int(rng.integers(1, 21))
        adj = rng.random((n, n)) < rng.uniform(0.0, 0.4)
        adj = adj | adj.T
        graph_ok += connected_components(adj) == closure_components(adj)
    split = sum(_phase_split_clusters(90.0, s) == 2 for s in range(50))
    merged = sum(_phase_split_clusters(5.0, s) == 1 for s in range(50))
    ok = graph_ok == 1000 and split == 50 and merged == 50
    report(5, "clustering", ok, f"components {graph_ok}/1000, 90 deg -> 2 clusters {split}/50, "
                                f"5 deg -> 1 cluster {merged}/50")
    assert ok


# 6 ----------------------------------------------------------------------------


def test_recognition():
    corpus = synth.generate_corpus(100, synth.RECOGNITION_CLASSES, seed=404)
    model = train_recognizer([single_cluster(it.trajectory) for it in corpus.train],
                             [it.label for it in corpus.train], TrainConfig(seed=404))
    hits = [recognize(model, single_cluster(it.trajectory)).label == it.label for it in corpus.test]
    acc = float(np.mean(hits))
    ok = acc >= 0.90
    report(6, "recognition", ok, f"held-out accuracy {acc:.3f} over {len(hits)} cases")
    assert ok


# 7 ----------------------------------------------------------------------------


def test_dsp_invariants():
    rng = np.random.default_rng(505)
    worst_hann = 0.0
    for _ in range(200):
        c = rng.uniform(-1e3, 1e3)
        y = dsp.hann_smooth(np.full(int(rng.integers(1, 400)), c), 30.0, rng.uniform(0.1, 3.0))
        worst_hann = max(worst_hann, float(np.max(np.abs(y - c))))
    worst_acf = 0.0
    for _ in range(200):
        x = rng.normal(size=int(rng.integers(2, 300))) * rng.uniform(1e-3, 1e3)
        if rng.random() < 0.3:
            x = np.cumsum(x)
        for unbiased in (False, True):
            worst_acf = max(worst_acf, float(np.max(np.abs(dsp.autocorrelation(x, unbiased)))))
    finite = 0
    for i in range(1000):
        n = int(rng.integers(8, 250))
        style = i % 5
        if style == 0:
            pts = rng.normal(0, rng.uniform(1e-6, 1e3), (n, 2))
        elif style == 1:
            pts = np.cumsum(rng.normal(size=(n, 2)), axis=0)
        elif style == 2:
            pts = np.zeros((n, 2))
        elif style == 3:
            pts = np.tile(rng.normal(size=2), (n, 1))
            pts[int(rng.integers(n))] += rng.normal(size=2)
        else:
            pts = np.round(rng.normal(0, 3, (n, 2)))
        fv = extract_features(TrajectoryWindow("fuzz", 0, n, float(rng.choice([10, 25, 30, 60])), pts))
        finite += len(fv.values) == 27 and bool(np.all(np.isfinite(fv.values)))
    ok = worst_hann < 1e-9 and worst_acf <= 1 + 1e-9 and finite == 1000
    report(7, "dsp invariants", ok, f"hann max |delta| {worst_hann:.1e}, max |r| {worst_acf:.12f}, "
                                    f"finite vectors {finite}/1000")
    assert ok


# 8 ----------------------------------------------------------------------------


def _e2e(root: Path, seed: int) -> tuple[bytes, bytes]:
    data, models, rep, scored = root / "data", root / "models.json", root / "report.json", root / "scored.json"
    steps = [
        ["synth", "--out", str(data)],
        ["train", str(data / "train.jsonl"), str(data / "train_truth.jsonl"), "--out", str(models)],
        ["run", str(data / "scene.jsonl"), "--boxes", str(data / "boxes.json"), "--models", str(models),
         "--out", str(rep)],
        ["evaluate", str(rep), str(data / "scene_truth.jsonl"), "--out", str(scored)],
    ]
    for argv in steps:
        code = cli_main(argv + ["--seed", str(seed)])
        if code:
            raise AssertionError(f"{argv[0]} exited {code}")
    return rep.read_bytes(), scored.read_bytes()


def test_end_to_end(tmp_path):
    t0 = time.perf_counter()
    first = _e2e(tmp_path / "a", 7)
    second = _e2e(tmp_path / "b", 7)
    elapsed = time.perf_counter() - t0
    scored = json.loads(first[1])
    validate_report(json.loads(first[0]))
    validate_report(scored)
    identical = first == second
    ok = identical and elapsed < 300
    report(8, "end to end", ok, f"byte-identical {identical}, schema-valid, {len(scored['clusters'])} clusters, "
                                f"tracking {scored['metrics']['tracking_rate']:.2f}, two runs {elapsed:.0f} s")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
