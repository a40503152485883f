"""Dataset assembly and training for the detector, rep counter and recognizer."""
from __future__ import annotations

import logging
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import analytics, detect, nn
from .cluster import DEFAULT_HANN_WINDOW_S, combine_cluster
from .errors import DegenerateSignalError, NormalizationError, ValidationError
from .features import window_features
from .trajectory import DEFAULT_STRIDE_S, DEFAULT_WINDOW_S, CombinedTrajectory, MotionTrajectory, slide_windows

log = logging.getLogger(__name__)

DETECTOR_NEGATIVE_WEIGHT = 2.0


class Example(NamedTuple):
    """A training trajectory with whatever ground truth is known for it."""

    trajectory: MotionTrajectory
    is_exercise: bool
    reps: float | None = None
    label: str | None = None


def detection_dataset(examples: Iterable[Example], filter_cfg: detect.FilterConfig | None = None,
                      window_s: float = DEFAULT_WINDOW_S, stride_s: float = DEFAULT_STRIDE_S):
    """Window feature matrix and 0/1 labels.

    With ``filter_cfg`` set, positive windows failing the filter are dropped
    (training only). Windows that do not move cannot be normalized and are
    skipped.
    """
    xs, ys = [], []
    dropped = 0
    for ex in examples:
        for w in slide_windows(ex.trajectory, window_s, stride_s):
            try:
                fv = window_features(w)
            except NormalizationError:
                continue
            if ex.is_exercise and filter_cfg is not None and not detect.passes_filter(fv, filter_cfg):
                dropped += 1
                continue
            xs.append(fv.values)
            ys.append(int(ex.is_exercise))
    if dropped:
        log.info("training filter dropped %d positive windows", dropped)
    return (np.array(xs) if xs else np.empty((0, 27))), np.array(ys, dtype=int)


def detector_config(cfg: nn.TrainConfig | None = None) -> nn.TrainConfig:
    if cfg is None:
        return nn.TrainConfig(negative_weight=DETECTOR_NEGATIVE_WEIGHT)
    return cfg


def train_detector(examples: Sequence[Example], cfg: nn.TrainConfig | None = None,
                   filter_cfg: detect.FilterConfig = detect.FilterConfig(), **window_kw) -> nn.MlpModel:
    x, y = detection_dataset(examples, filter_cfg, **window_kw)
    if len(np.unique(y)) < 2:
        raise ValidationError("detector training needs both exercise and non-exercise windows")
    model = nn.train(x, y, detector_config(cfg), "binary")
    model.meta["filter"] = dict(filter_cfg.__dict__)
    return model


def detection_metrics(model: nn.MlpModel, examples: Sequence[Example], threshold: float = 0.5,
                      **window_kw) -> dict:
    """Window-level accuracy, false-positive / false-negative rate, precision (no filtering)."""
    x, y = detection_dataset(examples, None, **window_kw)
    pred = (model.predict(x) >= threshold).astype(int)
    return binary_metrics(pred, y)


def binary_metrics(pred, truth) -> dict:
    pred = np.asarray(pred, dtype=int)
    truth = np.asarray(truth, dtype=int)
    tp = int(np.sum((pred == 1) & (truth == 1)))
    fp = int(np.sum((pred == 1) & (truth == 0)))
    tn = int(np.sum((pred == 0) & (truth == 0)))
    fn = int(np.sum((pred == 0) & (truth == 1)))
    n = len(truth)
    return {
        "n": n,
        "accuracy": (tp + tn) / n if n else 0.0,
        "false_positive_rate": fp / (fp + tn) if fp + tn else 0.0,
        "false_negative_rate": fn / (fn + tp) if fn + tp else 0.0,
        "precision": tp / (tp + fp) if tp + fp else 0.0,
    }


def single_cluster(t: MotionTrajectory, hann_window_s: float = DEFAULT_HANN_WINDOW_S) -> CombinedTrajectory:
    """Combined trajectory of a one-member cluster (what the pipeline would build)."""
    return combine_cluster([t], hann_window_s)


def rep_dataset(combined: Sequence[CombinedTrajectory], reps: Sequence[float],
                min_reps: float = analytics.MIN_REPS_FOR_TRAINING, windowed: bool = False):
    """Frequency blocks and targets; exercises under ``min_reps`` are left out."""
    xs, ys = [], []
    for c, r in zip(combined, reps):
        if r < min_reps:
            continue
        try:
            xs.append(analytics.rep_features(c, windowed))
        except DegenerateSignalError:
            continue
        ys.append(float(r))
    return np.array(xs).reshape(len(xs), -1), np.array(ys)


def train_regressor(combined: Sequence[CombinedTrajectory], reps: Sequence[float],
                    cfg: nn.TrainConfig = nn.TrainConfig(), windowed: bool = False) -> nn.MlpModel:
    x, y = rep_dataset(combined, reps, windowed=windowed)
    if len(y) < 2:
        raise ValidationError("rep counter training needs >= 2 exercises with >= 5 repetitions")
    model = nn.train(x, y, cfg, "regression")
    model.meta["windowed"] = windowed
    return model


def recognition_dataset(combined: Sequence[CombinedTrajectory], labels: Sequence[str]):
    xs, ys = [], []
    for c, lab in zip(combined, labels):
        rows, _ = analytics.recognition_inputs(c)
        xs.append(rows)
        ys.extend([lab] * len(rows))
    return np.vstack(xs), np.array(ys, dtype=object)


def train_recognizer(combined: Sequence[CombinedTrajectory], labels: Sequence[str],
                     cfg: nn.TrainConfig = nn.TrainConfig()) -> nn.MlpModel:
    if len(set(labels)) < 2:
        raise ValidationError("recognizer training needs at least two exercise classes")
    x, y = recognition_dataset(combined, labels)
    return nn.train(x, y.tolist(), cfg, "multiclass", classes=sorted(set(labels)))
