import json

import pytest

from repmotion.cli import main
from repmotion.io import validate_report


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    small = ["--set", "synth.n_per_kind=20", "--set", "synth.n_non_exercise=40", "--set", "train.max_epochs=80"]
    assert main(["synth", "--out", str(d / "data"), "--seed", "3", *small]) == 0
    assert main(["train", str(d / "data/train.jsonl"), str(d / "data/train_truth.jsonl"),
                 "--out", str(d / "models.json"), "--seed", "3", *small]) == 0
    return d


def test_run_and_evaluate(workdir, capsys):
    d = workdir
    assert main(["run", str(d / "data/scene.jsonl"), "--boxes", str(d / "data/boxes.json"),
                 "--models", str(d / "models.json"), "--out", str(d / "report.json")]) == 0
    report = json.loads((d / "report.json").read_text())
    validate_report(report)
    capsys.readouterr()
    assert main(["evaluate", str(d / "report.json"), str(d / "data/scene_truth.jsonl"),
                 "--out", str(d / "scored.json")]) == 0
    metrics = json.loads(capsys.readouterr().out)
    assert 0 <= metrics["tracking_rate"] <= 1
    validate_report(json.loads((d / "scored.json").read_text()))


def test_features(workdir):
    out = workdir / "f.jsonl"
    assert main(["features", str(workdir / "data/scene.jsonl"), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(json.loads(lines[0])["feature_names"]) == 27
    assert len(json.loads(lines[1])["features"]) == 27


def test_missing_box_config_is_configuration_error(workdir, capsys):
    code = main(["run", str(workdir / "data/scene.jsonl"), "--boxes", str(workdir / "nope.json"),
                 "--models", str(workdir / "models.json"), "--out", str(workdir / "r.json")])
    assert code == 1 and "not found" in capsys.readouterr().err


def test_missing_model_file(workdir):
    assert main(["run", str(workdir / "data/scene.jsonl"), "--boxes", str(workdir / "data/boxes.json"),
                 "--models", str(workdir / "nope.json")]) == 1


def test_usage_errors_exit_1():
    assert main([]) == 1
    assert main(["run"]) == 1
    assert main(["gradcheck", "--set", "nonsense"]) == 1


def test_config_file_then_flags(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 1, "synth": {"n_per_kind": 2, "n_non_exercise": 2, "scene": {
        "boxes": [{"id": "a", "x_min": 0, "y_min": 0, "x_max": 100, "y_max": 100}], "exercises": []}}}))
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "s"), "--set", "synth.n_per_kind=3"]) == 0
    assert len((tmp_path / "s/train.jsonl").read_text().splitlines()) == 3 * 5 + 2


def test_gradcheck(capsys):
    assert main(["gradcheck"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["passed"] and set(out["max_relative_error"]) == {"detector", "regressor", "recognizer"}
