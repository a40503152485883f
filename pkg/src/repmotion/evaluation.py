"""Scoring a report against ground truth.

Per-trajectory truth records (``id``) drive window-level detection metrics.
Per-exercise records (``region``) are matched to predicted clusters by
temporal IoU, one-to-one and greedily, and the matched pairs give the rep
and recognition scores.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ValidationError
from .synth import NON_EXERCISE_LABEL

MIN_WINDOW_OVERLAP = 0.5
MIN_CLUSTER_IOU = 0.5


def interval_overlap(a0: int, a1: int, b0: int, b1: int) -> int:
    """Frames shared by two inclusive frame intervals."""
    return max(0, min(a1, b1) - max(a0, b0) + 1)


def temporal_iou(a0: int, a1: int, b0: int, b1: int) -> float:
    inter = interval_overlap(a0, a1, b0, b1)
    union = (a1 - a0 + 1) + (b1 - b0 + 1) - inter
    return inter / union if union > 0 else 0.0


def _is_exercise(rec: dict) -> bool:
    return rec.get("class") not in (None, NON_EXERCISE_LABEL)


def _check_ids(report: dict, by_id: dict) -> None:
    known = {t["id"] for t in report["trajectories"]} | {r["id"] for r in report["rejected"]}
    unknown = sorted(set(by_id) - known)
    if unknown:
        shown = ", ".join(unknown[:20]) + (" ..." if len(unknown) > 20 else "")
        raise ValidationError(f"ground truth names trajectories absent from the report: {shown}")
    if by_id:
        unlabelled = sorted(t["id"] for t in report["trajectories"] if t["id"] not in by_id)
        if unlabelled:
            shown = ", ".join(unlabelled[:20]) + (" ..." if len(unlabelled) > 20 else "")
            raise ValidationError(f"report trajectories without ground truth: {shown}")


def window_truth(window: dict, rec: dict) -> int:
    """1 when at least half of the window lies inside the true exercise interval."""
    if not _is_exercise(rec):
        return 0
    length = window["end_frame"] - window["start_frame"] + 1
    start = rec.get("start_frame", window["start_frame"])
    end = rec.get("end_frame", window["end_frame"])
    return int(interval_overlap(window["start_frame"], window["end_frame"], start, end) >= MIN_WINDOW_OVERLAP * length)


def match_clusters(clusters: Sequence[dict], exercises: Sequence[dict], min_iou: float = MIN_CLUSTER_IOU):
    """Greedy one-to-one matching by descending IoU within the same region.

    Returns ``(cluster_index, exercise_index, iou)`` triples. Ties are broken
    by list order, which keeps the result deterministic.
    """
    cand = []
    for i, c in enumerate(clusters):
        for j, e in enumerate(exercises):
            if c["box_id"] != str(e["region"]):
                continue
            iou = temporal_iou(c["start_frame"], c["end_frame"], e["start_frame"], e["end_frame"])
            if iou >= min_iou:
                cand.append((-iou, i, j))
    cand.sort()
    used_c, used_e, out = set(), set(), []
    for neg, i, j in cand:
        if i in used_c or j in used_e:
            continue
        used_c.add(i)
        used_e.add(j)
        out.append((i, j, -neg))
    return sorted(out)


def evaluate(report: dict, truth: Sequence[dict]) -> dict:
    """Metrics block for ``report`` given parsed ground-truth records.

    Rates with an empty denominator are reported as ``None`` for detection,
    rep and recognition scores; tracking and cluster false-positive rates
    fall back to 0.
    """
    by_id = {}
    for r in truth:
        if "id" in r:
            if r["id"] in by_id:
                raise ValidationError(f"duplicate ground truth for trajectory {r['id']!r}")
            by_id[r["id"]] = r
    _check_ids(report, by_id)

    pred, true = [], []
    for t in report["trajectories"]:
        rec = by_id.get(t["id"])
        if rec is None:
            continue
        for w in t["windows"]:
            pred.append(w["label"])
            true.append(window_truth(w, rec))
    pred, true = np.array(pred, dtype=int), np.array(true, dtype=int)
    tp = int(np.sum((pred == 1) & (true == 1)))
    fp = int(np.sum((pred == 1) & (true == 0)))
    tn = int(np.sum((pred == 0) & (true == 0)))

    exercises = [r for r in truth if "region" in r and _is_exercise(r)]
    clusters = report["clusters"]
    matches = match_clusters(clusters, exercises)

    errors, hits = [], []
    for i, j, _ in matches:
        c, e = clusters[i], exercises[j]
        if e.get("reps") is not None and c["reps"]["counted"]:
            errors.append(c["reps"]["value"] - float(e["reps"]))
        hits.append(c["recognition"]["label"] == e["class"])
    errors = np.abs(np.array(errors))

    return {
        "detection_accuracy": (tp + tn) / len(true) if len(true) else None,
        "false_positive_rate": fp / (fp + tn) if fp + tn else None,
        "precision": tp / (tp + fp) if tp + fp else None,
        "tracking_rate": len(matches) / len(exercises) if exercises else 0.0,
        "cluster_false_positive_rate": (len(clusters) - len(matches)) / len(clusters) if clusters else 0.0,
        "rep_mae": float(errors.mean()) if len(errors) else None,
        "rep_std": float(errors.std()) if len(errors) else None,
        "recognition_accuracy": float(np.mean(hits)) if hits else None,
        "n_windows": int(len(true)),
        "n_exercises": len(exercises),
        "n_clusters": len(clusters),
        "n_matched": len(matches),
    }
