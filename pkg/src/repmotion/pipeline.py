"""End-to-end pipeline: trajectories in, analytics report out."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import __version__, analytics, detect, nn
from .cluster import cluster_segments, natural_key
from .errors import NormalizationError, ValidationError
from .features import FEATURE_VERSION, trim_stationary, window_features
from .io import REPORT_SCHEMA_VERSION, ModelBundle, boxes_doc
from .trajectory import (DEFAULT_MAX_LIFESPAN_S, DEFAULT_STRIDE_S, DEFAULT_WINDOW_S, BoundingBox,
                         IngestResult, MotionTrajectory, slide_windows)
from .training import (Example, binary_metrics, detection_metrics, single_cluster, train_detector,
                       train_recognizer, train_regressor)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    max_lifespan_s: float = DEFAULT_MAX_LIFESPAN_S
    window_s: float = DEFAULT_WINDOW_S
    stride_s: float = DEFAULT_STRIDE_S
    min_move_px: float = 4.0
    threshold: float = 0.5
    vote_k: int = 3
    vote_mode: str = "tiled"
    phase_threshold_deg: float = 15.0
    min_overlap_s: float = 2.0
    hann_window_s: float = 1.0
    rep_windowed: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown pipeline option(s): {', '.join(sorted(unknown))}")
        return cls(**d)


def _model_summary(m: nn.MlpModel) -> dict:
    out = {"task": m.task, "layer_sizes": m.layer_sizes}
    if m.classes:
        out["classes"] = [str(c) for c in m.classes]
    return out


def _trajectory_entry(t: MotionTrajectory, status="ok", reason=None) -> dict:
    return {"id": t.id, "fps": t.fps, "status": status, "reason": reason, "start_frame": t.start_frame,
            "n_points": len(t.points), "windows": [], "segments": []}


def detect_trajectory(model: nn.MlpModel, t: MotionTrajectory, cfg: PipelineConfig):
    """Report entry and segments for one trajectory.

    Windows that do not move cannot be normalized; they are scored 0 and
    marked degenerate rather than dropped.
    """
    if trim_stationary(t, cfg.min_move_px).stationary:
        return _trajectory_entry(t, "stationary", f"moved less than {cfg.min_move_px:g} px"), []
    windows = slide_windows(t, cfg.window_s, cfg.stride_s)
    if not windows:
        return _trajectory_entry(t, "too_short", f"shorter than one {cfg.window_s:g} s window"), []
    probs = np.zeros(len(windows))
    degenerate = np.zeros(len(windows), dtype=bool)
    rows, where = [], []
    for i, w in enumerate(windows):
        try:
            rows.append(window_features(w))
            where.append(i)
        except NormalizationError:
            degenerate[i] = True
    if rows:
        probs[where] = detect.classify_windows(model, rows)
    labels = detect.vote_smooth((probs >= cfg.threshold).astype(int), cfg.vote_k, cfg.vote_mode)
    segments = detect.merge_segments(labels, windows, probs)
    entry = _trajectory_entry(t)
    entry["windows"] = [{"start_frame": w.window_start_frame, "end_frame": w.window_end_frame,
                         "probability": float(p), "label": int(lab), "degenerate": bool(d)}
                        for w, p, lab, d in zip(windows, probs, labels, degenerate)]
    entry["segments"] = [{"id": s.id, "start_frame": s.start_frame, "end_frame": s.end_frame,
                          "windows": list(s.windows), "label_confidence": s.label_confidence}
                         for s in segments]
    return entry, segments


def run_pipeline(trajectories: Sequence[MotionTrajectory] | IngestResult, boxes: Sequence[BoundingBox],
                 bundle: ModelBundle, cfg: PipelineConfig = PipelineConfig(), seed: int = 0) -> dict:
    """Detect, cluster, count and recognize; returns the report document.

    Accepts either trajectories or a full :class:`IngestResult`, in which
    case rejected records and parse errors are carried into the report.
    """
    bundle.require("detector", "regressor", "recognizer")
    rejected, parse_errors = [], []
    if isinstance(trajectories, IngestResult):
        rejected = [{"id": r.id, "line": r.line, "reason": r.reason} for r in trajectories.rejected]
        parse_errors = [{"line": e.line, "message": str(e)} for e in trajectories.errors]
        trajectories = trajectories.accepted
    ids = [t.id for t in trajectories]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate trajectory ids")
    by_id = {t.id: t for t in trajectories}

    entries, segments = [], []
    for t in trajectories:
        entry, segs = detect_trajectory(bundle.detector, t, cfg)
        entries.append(entry)
        segments.extend(segs)

    clusters = cluster_segments(segments, by_id, boxes, cfg.phase_threshold_deg, cfg.min_overlap_s,
                                cfg.hann_window_s)
    cluster_docs = []
    for c in clusters:
        comb = c.combined
        reps = analytics.count_reps(bundle.regressor, comb, cfg.rep_windowed)
        rec = analytics.recognize(bundle.recognizer, comb, cfg.window_s, cfg.stride_s)
        rel = comb.points - comb.points.mean(axis=0)
        cluster_docs.append({
            "id": c.id,
            "box_id": c.box_id,
            "members": list(c.member_segments),
            "start_frame": c.start_frame,
            "end_frame": c.end_frame,
            "combined": {"fps": comb.fps, "start_frame": comb.start_frame, "n_points": len(comb.points),
                         "gap_filled": comb.gap_filled, "mean_xy": comb.points.mean(axis=0).tolist(),
                         "span_px": float(np.hypot(rel[:, 0], rel[:, 1]).max() * 2)},
            "reps": {"counted": reps.counted, "value": reps.value, "rounded": reps.rounded},
            "recognition": {"label": str(rec.label),
                            "probabilities": {str(k): float(p) for k, p in
                                              zip(bundle.recognizer.classes, rec.probabilities)},
                            "n_windows": rec.n_windows, "fallback": rec.fallback},
        })

    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool_version": __version__,
        "seed": int(seed),
        "config": asdict(cfg),
        "models": {"feature_version": bundle.feature_version,
                   "detector": _model_summary(bundle.detector),
                   "regressor": _model_summary(bundle.regressor),
                   "recognizer": _model_summary(bundle.recognizer)},
        "boxes": boxes_doc(sorted(boxes, key=lambda b: natural_key(b.id)))["boxes"],
        "trajectories": entries,
        "rejected": rejected,
        "parse_errors": parse_errors,
        "clusters": cluster_docs,
    }


# ---------------------------------------------------------------------------
# training


def examples_from_truth(trajectories: Sequence[MotionTrajectory], truth: Sequence[dict]) -> list[Example]:
    """Pair trajectories with their per-trajectory truth records (``id`` key)."""
    by_id = {r["id"]: r for r in truth if "id" in r}
    missing = [t.id for t in trajectories if t.id not in by_id]
    if missing:
        shown = ", ".join(missing[:10]) + (" ..." if len(missing) > 10 else "")
        raise ValidationError(f"no ground truth for trajectories: {shown}")
    out = []
    for t in trajectories:
        r = by_id[t.id]
        cls = r.get("class")
        out.append(Example(t, cls is not None and cls != "non_exercise", r.get("reps"),
                           cls if cls not in (None, "non_exercise") else None))
    return out


def _split(n: int, test_fraction: float, rng: np.random.Generator):
    order = rng.permutation(n)
    n_test = int(round(test_fraction * n))
    return np.sort(order[n_test:]), np.sort(order[:n_test])


def train_models(examples: Sequence[Example], train_cfg: nn.TrainConfig = nn.TrainConfig(),
                 filter_cfg: detect.FilterConfig = detect.FilterConfig(),
                 pipeline_cfg: PipelineConfig = PipelineConfig(), seed: int = 0,
                 test_fraction: float = 0.2, has_class_labels: bool = True,
                 models: Sequence[str] = ("detector", "regressor", "recognizer")) -> ModelBundle:
    """Train the requested models and measure each on a held-out split.

    Without class labels only the rep counter can be trained; the others are
    skipped with a warning. With labels present but one detection class
    missing, training fails.
    """
    rng = np.random.default_rng(seed)
    bundle = ModelBundle(seed=seed, config={"train": asdict(train_cfg) | {"hidden": list(train_cfg.hidden)},
                                            "filter": asdict(filter_cfg), "pipeline": asdict(pipeline_cfg)})
    cfg = nn.TrainConfig(**{**asdict(train_cfg), "seed": seed})
    win = {"window_s": pipeline_cfg.window_s, "stride_s": pipeline_cfg.stride_s}

    wanted = list(models)
    if not has_class_labels:
        for name in ("detector", "recognizer"):
            if name in wanted:
                log.warning("corpus has no class labels; skipping %s", name)
                wanted.remove(name)

    if "detector" in wanted:
        if len({e.is_exercise for e in examples}) < 2:
            raise ValidationError("detector training needs exercise and non_exercise examples")
        tr, te = _split(len(examples), test_fraction, rng)
        det_cfg = nn.TrainConfig(**{**asdict(cfg), "negative_weight": max(cfg.negative_weight, 2.0)})
        bundle.detector = train_detector([examples[i] for i in tr], det_cfg, filter_cfg, **win)
        bundle.metrics["detector"] = detection_metrics(
            bundle.detector, [examples[i] for i in te], pipeline_cfg.threshold, **win)

    exercises = [e for e in examples if e.is_exercise or not has_class_labels]
    if "regressor" in wanted:
        with_reps = [e for e in exercises if e.reps is not None]
        if not with_reps:
            raise ValidationError("rep counter training needs exercises with rep counts")
        combined = [single_cluster(e.trajectory, pipeline_cfg.hann_window_s) for e in with_reps]
        tr, te = _split(len(with_reps), test_fraction, rng)
        bundle.regressor = train_regressor([combined[i] for i in tr], [with_reps[i].reps for i in tr], cfg,
                                           pipeline_cfg.rep_windowed)
        errs = []
        for i in te:
            est = analytics.count_reps(bundle.regressor, combined[i], pipeline_cfg.rep_windowed)
            if est.counted:
                errs.append(abs(est.value - with_reps[i].reps))
        bundle.metrics["regressor"] = {"n": len(errs), "mae": float(np.mean(errs)) if errs else None}

    if "recognizer" in wanted:
        labelled = [e for e in exercises if e.label is not None]
        if len({e.label for e in labelled}) < 2:
            raise ValidationError("recognizer training needs at least two exercise classes")
        combined = [single_cluster(e.trajectory, pipeline_cfg.hann_window_s) for e in labelled]
        tr, te = _split(len(labelled), test_fraction, rng)
        bundle.recognizer = train_recognizer([combined[i] for i in tr], [labelled[i].label for i in tr], cfg)
        hits = [analytics.recognize(bundle.recognizer, combined[i], **win).label == labelled[i].label for i in te]
        bundle.metrics["recognizer"] = {"n": len(hits), "accuracy": float(np.mean(hits)) if hits else None}
    return bundle


__all__ = ["PipelineConfig", "run_pipeline", "train_models", "examples_from_truth", "detect_trajectory",
           "binary_metrics", "FEATURE_VERSION"]
