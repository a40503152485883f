import copy
import logging

import numpy as np
import pytest

from repmotion import synth
from repmotion.errors import ModelError, SchemaError, ValidationError
from repmotion.evaluation import evaluate
from repmotion.nn import TrainConfig
from repmotion.io import ModelBundle, dumps, validate_report
from repmotion.pipeline import PipelineConfig, examples_from_truth, run_pipeline, train_models
from repmotion.training import Example
from repmotion.trajectory import BoundingBox, ingest_trajectories

from conftest import corpus_examples, traj_from

BOXES = [BoundingBox("left", 0, 0, 320, 480), BoundingBox("right", 320, 0, 640, 480)]
EXERCISES = [
    synth.SceneExercise("left", "sinusoid_y", 0.8, 40, 1.0, 14.0, 0.0, center=(100, 240)),
    synth.SceneExercise("left", "sinusoid_y", 0.8, 40, 1.0, 14.0, 90.0, center=(220, 240)),
    synth.SceneExercise("right", "circle", 0.6, 45, 3.0, 12.0, 30.0),
]


@pytest.fixture(scope="module")
def scene():
    return synth.generate_scene(EXERCISES, BOXES, seed=5, n_distractors=4)


@pytest.fixture(scope="module")
def report(bundle, scene):
    extra = [traj_from(np.full((100, 2), 50.0), tid="still"), traj_from(np.arange(60.0).reshape(30, 2) * 5, tid="short")]
    return run_pipeline(scene.trajectories + extra, BOXES, bundle, seed=9)


def test_three_exercises_three_clusters(report, scene):
    validate_report(report)
    assert len(report["clusters"]) == 3
    assert sorted(c["box_id"] for c in report["clusters"]) == ["left", "left", "right"]
    truth = scene.truth + [{"id": "still", "class": "non_exercise"}, {"id": "short", "class": "non_exercise"}]
    m = evaluate(report, truth)
    assert m["tracking_rate"] == 1.0 and m["cluster_false_positive_rate"] == 0.0


def test_degenerate_trajectories_recorded(report):
    status = {t["id"]: t["status"] for t in report["trajectories"]}
    assert status["still"] == "stationary" and status["short"] == "too_short"


def test_rejections_carried_into_report(bundle):
    lines = ['{"id": "x", "fps": 30, "start_frame": 0, "points": [[0, 0]]}', "garbage",
             '{"id": "long", "fps": 30, "start_frame": 0, "points": ' + str([[i, i] for i in range(400)]) + "}"]
    rep = run_pipeline(ingest_trajectories(lines), BOXES, bundle)
    validate_report(rep)
    assert [r["id"] for r in rep["rejected"]] == ["long"]
    assert rep["parse_errors"][0]["line"] == 2


def test_run_is_deterministic(bundle, scene):
    a = run_pipeline(scene.trajectories, BOXES, bundle, seed=1)
    b = run_pipeline(scene.trajectories, BOXES, bundle, seed=1)
    assert dumps(a) == dumps(b)


def test_missing_model(bundle, scene):
    partial = ModelBundle(detector=bundle.detector, regressor=bundle.regressor)
    with pytest.raises(ModelError, match="recognizer"):
        run_pipeline(scene.trajectories, BOXES, partial)


def test_tampered_report_fails_validation(report):
    bad = copy.deepcopy(report)
    bad["clusters"][0]["members"].append("nobody#0")
    with pytest.raises(SchemaError):
        validate_report(bad)
    bad = copy.deepcopy(report)
    bad["clusters"][0]["recognition"]["probabilities"] = {"a": 0.5, "b": 0.6}
    with pytest.raises(SchemaError):
        validate_report(bad)
    bad = copy.deepcopy(report)
    del bad["seed"]
    with pytest.raises(SchemaError):
        validate_report(bad)


def test_bundle_round_trip_and_determinism(tmp_path):
    ex = corpus_examples(8, 16, seed=2)
    cfg = TrainConfig(max_epochs=5)
    a = train_models(ex, cfg, seed=1)
    b = train_models(ex, cfg, seed=1)
    a.save(tmp_path / "a.json")
    b.save(tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    again = ModelBundle.load(tmp_path / "a.json")
    assert dumps(again.to_dict()) == dumps(a.to_dict())
    assert set(a.metrics) == {"detector", "regressor", "recognizer"}


def test_unlabelled_corpus_trains_regressor_only(caplog):
    ex = [Example(e.trajectory, False, e.reps, None) for e in corpus_examples(8, 1, seed=3) if e.is_exercise]
    with caplog.at_level(logging.WARNING):
        b = train_models(ex, TrainConfig(max_epochs=5), has_class_labels=False)
    assert b.regressor is not None and b.detector is None and b.recognizer is None
    assert "skipping detector" in caplog.text


def test_missing_detection_class_is_error():
    ex = [e for e in corpus_examples(4, 1, seed=3) if e.is_exercise]
    with pytest.raises(ValidationError):
        train_models(ex)


def test_examples_need_truth():
    with pytest.raises(ValidationError, match="lonely"):
        examples_from_truth([traj_from(np.zeros((3, 2)), tid="lonely")], [])


def test_unknown_pipeline_option():
    with pytest.raises(ValidationError):
        PipelineConfig.from_dict({"treshold": 0.4})
