"""Command-line entry point.

Settings are layered: built-in defaults, then the bundled demo config (or
the file given with ``--config``), then ``--seed`` and ``--set`` flags.
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, nn, synth
from .detect import FilterConfig
from .errors import ConfigurationError, NormalizationError, RepMotionError, ValidationError
from .evaluation import evaluate
from .features import FEATURE_NAMES, FEATURE_VERSION, window_features
from .io import (ModelBundle, boxes_doc, dumps, parse_boxes, read_boxes, read_json, read_trajectories,
                 read_truth, validate_report, write_json, write_jsonl, write_trajectories)
from .pipeline import PipelineConfig, examples_from_truth, run_pipeline, train_models
from .trajectory import slide_windows

log = logging.getLogger("repmotion")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(f"{self.prog}: {message}")


def bundled_config() -> dict:
    return json.loads(resources.files("repmotion").joinpath("data/demo_config.json").read_text())


def _set_path(cfg: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"--set {dotted}: {k!r} is not a section")
    node[keys[-1]] = value


def load_config(args) -> dict:
    cfg = read_json(args.config) if args.config else bundled_config()
    if not isinstance(cfg, dict):
        raise ConfigurationError("config file must hold a JSON object")
    cfg = copy.deepcopy(cfg)
    for item in args.set or []:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigurationError(f"--set expects key=value, got {item!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        _set_path(cfg, key, value)
    if args.seed is not None:
        cfg["seed"] = args.seed
    cfg.setdefault("seed", 0)
    return cfg


def _section(cfg: dict, name: str, factory):
    try:
        return factory(cfg.get(name) or {})
    except TypeError as exc:
        raise ConfigurationError(f"config section {name!r}: {exc}") from None


def _pipeline_cfg(cfg):
    return _section(cfg, "pipeline", PipelineConfig.from_dict)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ------------------------------------------------------------------


def cmd_synth(args, cfg) -> int:
    """Write a labelled training corpus and a multi-station scene."""
    s = cfg.get("synth", {})
    seed = int(cfg["seed"])
    fps = float(s.get("fps", 30.0))
    out = Path(args.out or "synth_out")
    out.mkdir(parents=True, exist_ok=True)

    seeds = np.random.SeedSequence(seed).generate_state(3)
    ex = synth.generate_corpus(int(s.get("n_per_kind", 60)), synth.RECOGNITION_CLASSES, int(seeds[0]),
                               fps=fps, id_prefix="ex")
    non = synth.generate_corpus(int(s.get("n_non_exercise", 150)),
                                {synth.NON_EXERCISE_LABEL: synth.NON_EXERCISE_KINDS}, int(seeds[1]),
                                fps=fps, id_prefix="nx")
    items = ex.items + non.items
    write_trajectories(out / "train.jsonl", [it.trajectory for it in items])
    write_jsonl(out / "train_truth.jsonl",
                [it.truth.to_record(it.trajectory.id, it.trajectory.start_frame, it.trajectory.end_frame)
                 for it in items])

    sc = s.get("scene", {})
    boxes = parse_boxes({"boxes": sc.get("boxes", [])})
    exercises = []
    for e in sc.get("exercises", []):
        e = dict(e)
        if e.get("center") is not None:
            e["center"] = tuple(e["center"])
        try:
            exercises.append(synth.SceneExercise(**e))
        except TypeError as exc:
            raise ConfigurationError(f"scene exercise: {exc}") from None
    scene = synth.generate_scene(exercises, boxes, int(seeds[2]), fps, float(sc.get("lifespan_s", 10.0)),
                                 int(sc.get("n_distractors", 0)))
    write_trajectories(out / "scene.jsonl", scene.trajectories)
    write_jsonl(out / "scene_truth.jsonl", scene.truth)
    write_json(out / "boxes.json", boxes_doc(boxes))
    print(f"wrote {len(items)} training and {len(scene.trajectories)} scene trajectories to {out}")
    return EXIT_OK


def cmd_features(args, cfg) -> int:
    pcfg = _pipeline_cfg(cfg)
    ingest = read_trajectories(args.trajectories, pcfg.max_lifespan_s)
    for e in ingest.errors:
        log.warning("%s", e)
    rows = []
    for t in ingest.accepted:
        for w in slide_windows(t, pcfg.window_s, pcfg.stride_s):
            rec = {"id": t.id, "window_start_frame": w.window_start_frame, "feature_version": FEATURE_VERSION}
            try:
                fv = window_features(w)
                rec.update(features=fv.to_list(), degenerate=fv.degenerate)
            except NormalizationError:
                rec.update(features=None, degenerate=True)
            rows.append(json.dumps(rec, sort_keys=True))
    header = json.dumps({"feature_names": list(FEATURE_NAMES), "feature_version": FEATURE_VERSION})
    _emit("\n".join([header] + rows) + "\n", args.out)
    return EXIT_OK


def cmd_train(args, cfg) -> int:
    pcfg = _pipeline_cfg(cfg)
    ingest = read_trajectories(args.corpus, pcfg.max_lifespan_s)
    if ingest.errors:
        raise ingest.errors[0]
    for r in ingest.rejected:
        log.warning("skipping %s (line %d): %s", r.id, r.line, r.reason)
    truth = read_truth(args.truth)
    has_labels = any("class" in r for r in truth)
    examples = examples_from_truth(ingest.accepted, truth)
    models = args.models.split(",") if args.models else ("detector", "regressor", "recognizer")
    bundle = train_models(examples, _section(cfg, "train", nn.TrainConfig.from_dict),
                          _section(cfg, "filter", FilterConfig.from_dict), pcfg, int(cfg["seed"]),
                          has_class_labels=has_labels, models=models)
    bundle.save(args.out or "models.json")
    sys.stdout.write(dumps({"held_out": bundle.metrics}))
    return EXIT_OK


def cmd_run(args, cfg) -> int:
    pcfg = _pipeline_cfg(cfg)
    boxes = read_boxes(args.boxes)
    bundle = ModelBundle.load(args.models)
    ingest = read_trajectories(args.trajectories, pcfg.max_lifespan_s)
    report = run_pipeline(ingest, boxes, bundle, pcfg, int(cfg["seed"]))
    validate_report(report)
    write_json(args.out or "report.json", report)
    print(f"{len(report['trajectories'])} trajectories, {len(report['clusters'])} clusters")
    return EXIT_OK


def cmd_evaluate(args, cfg) -> int:
    report = read_json(args.report)
    validate_report(report)
    metrics = evaluate(report, read_truth(args.truth))
    if args.out:
        report = dict(report, metrics=metrics)
        validate_report(report)
        write_json(args.out, report)
    sys.stdout.write(dumps(metrics))
    return EXIT_OK


def cmd_gradcheck(args, cfg) -> int:
    errors = nn.check_architectures(int(cfg["seed"]))
    ok = all(e <= args.tol for e in errors.values())
    _emit(dumps({"max_relative_error": errors, "tolerance": args.tol, "passed": ok}), args.out)
    return EXIT_OK if ok else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("--config", help="JSON config file (default: the bundled demo config)")
    common.add_argument("--out", help="output path (a directory for synth)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config value, e.g. pipeline.threshold=0.6")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="repmotion", description="Repetitive-motion analytics for keypoint trajectories.")
    p.add_argument("--version", action="version", version=f"repmotion {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus and scene")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("features", parents=[common], help="per-window feature vectors as JSON lines")
    s.add_argument("trajectories")
    s.set_defaults(func=cmd_features)

    s = sub.add_parser("train", parents=[common], help="train the model bundle")
    s.add_argument("corpus")
    s.add_argument("truth")
    s.add_argument("--models", help="comma-separated subset of detector,regressor,recognizer")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("run", parents=[common], help="run the pipeline and write a report")
    s.add_argument("trajectories")
    s.add_argument("--boxes", required=True)
    s.add_argument("--models", required=True)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("evaluate", parents=[common], help="score a report against ground truth")
    s.add_argument("report")
    s.add_argument("truth")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("gradcheck", parents=[common], help="check backprop against finite differences")
    s.add_argument("--tol", type=float, default=1e-4)
    s.set_defaults(func=cmd_gradcheck)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, load_config(args))
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (RepMotionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
