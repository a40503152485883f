"""Exercise detection: window classification, vote smoothing, segment merging."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .features import FeatureVector
from .nn import MlpModel
from .trajectory import ExerciseSegment, TrajectoryWindow


@dataclass(frozen=True)
class FilterConfig:
    """Thresholds a training positive must pass to be kept.

    Only ever applied to exercise examples in the training split.
    """

    min_ac_max_peak: float = 0.5
    min_prominent_peaks: int = 0
    max_weak_peaks: int = 3

    @classmethod
    def from_dict(cls, d: dict) -> "FilterConfig":
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


def _matrix(windows: Sequence[FeatureVector] | np.ndarray) -> np.ndarray:
    if isinstance(windows, np.ndarray):
        return windows.reshape(len(windows), -1) if len(windows) else windows.reshape(0, 0)
    return np.array([w.values for w in windows]) if len(windows) else np.empty((0, 0))


def classify_windows(model: MlpModel, windows: Sequence[FeatureVector]) -> np.ndarray:
    """Exercise probability for each window, in input order."""
    if model.task != "binary":
        raise ValidationError(f"detector must be a binary model, got {model.task!r}")
    x = _matrix(windows)
    if len(x) == 0:
        return np.empty(0)
    return model.predict(x)


def vote_smooth(labels, k: int = 3, mode: str = "tiled") -> np.ndarray:
    """Majority vote over runs of ``k`` consecutive labels.

    ``tiled``: labels are cut into consecutive blocks of ``k`` and every
    member of a block receives the block's majority; a trailing partial
    block keeps its raw labels. ``sliding``: each label becomes the majority
    of the ``k`` labels centred on it (truncated at the ends, ties keep the
    raw label).
    """
    if k < 1 or k % 2 == 0:
        raise ValueError("k must be odd and >= 1")
    lab = np.asarray(labels, dtype=int)
    out = lab.copy()
    if mode == "tiled":
        full = len(lab) // k * k
        if full:
            blocks = lab[:full].reshape(-1, k)
            out[:full] = np.repeat((blocks.sum(axis=1) * 2 > k).astype(int), k)
    elif mode == "sliding":
        h = k // 2
        for i in range(len(lab)):
            seg = lab[max(i - h, 0):i + h + 1]
            ones = seg.sum()
            if ones * 2 != len(seg):
                out[i] = int(ones * 2 > len(seg))
    else:
        raise ValueError(f"unknown vote mode {mode!r}")
    return out


def merge_segments(labels, windows: Sequence[TrajectoryWindow], probabilities=None) -> list[ExerciseSegment]:
    """Turn maximal runs of positive labels into segments.

    A segment spans from its first window's start to its last window's end
    frame. ``label_confidence`` is the mean probability over the run (1.0 if
    no probabilities are given).
    """
    lab = np.asarray(labels, dtype=int)
    if len(lab) != len(windows):
        raise ValueError("labels and windows differ in length")
    probs = np.ones(len(lab)) if probabilities is None else np.asarray(probabilities, dtype=float)
    segments = []
    i = 0
    while i < len(lab):
        if not lab[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(lab) and lab[j + 1]:
            j += 1
        segments.append(ExerciseSegment(
            windows[i].source_id, windows[i].window_start_frame, windows[j].window_end_frame,
            tuple(range(i, j + 1)), float(probs[i:j + 1].mean())))
        i = j + 1
    return segments


def passes_filter(fv: FeatureVector, cfg: FilterConfig) -> bool:
    return (fv["ac_max_peak"] >= cfg.min_ac_max_peak
            and fv["n_prominent_peaks"] >= cfg.min_prominent_peaks
            and fv["n_weak_peaks"] <= cfg.max_weak_peaks)


def filter_training_positives(windows: Sequence[FeatureVector], thresholds: FilterConfig = FilterConfig()
                              ) -> list[FeatureVector]:
    return [w for w in windows if passes_filter(w, thresholds)]


def detect(model: MlpModel, feature_vectors: Sequence[FeatureVector], windows: Sequence[TrajectoryWindow],
           threshold: float = 0.5, vote_k: int = 3, vote_mode: str = "tiled"):
    """Probabilities, smoothed labels and segments for one trajectory's windows."""
    probs = classify_windows(model, feature_vectors)
    raw = (probs >= threshold).astype(int)
    labels = vote_smooth(raw, vote_k, vote_mode)
    return probs, labels, merge_segments(labels, windows, probs)
