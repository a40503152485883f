"""Repetition counting and exercise recognition on combined trajectories."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DegenerateSignalError, ValidationError
from .features import N_FREQUENCY_FEATURES, extract_features, normalize_window, trajectory_window
from .nn import MlpModel
from .trajectory import (DEFAULT_STRIDE_S, DEFAULT_WINDOW_S, CombinedTrajectory, TrajectoryWindow,
                         slide_windows)

QUANTIZED_SAMPLES = 150
MIN_REPS_FOR_TRAINING = 5.0


class RepCount(NamedTuple):
    value: float | None  # raw regressor output, clipped at 0
    rounded: int | None
    counted: bool  # False: degenerate trajectory, no estimate


class Recognition(NamedTuple):
    label: object
    probabilities: np.ndarray  # aligned with the model's classes, sums to 1
    n_windows: int
    fallback: bool  # True when the trajectory was shorter than one window


def rep_features(c: CombinedTrajectory, windowed: bool = False, window_s: float = DEFAULT_WINDOW_S,
                 stride_s: float = DEFAULT_STRIDE_S) -> np.ndarray:
    """Frequency-based feature block of a combined trajectory.

    By default the whole trajectory is one window. ``windowed=True`` averages
    the block over sliding windows instead (whole trajectory if too short).
    Raises :class:`DegenerateSignalError` when there is no usable motion.
    """
    t = c.as_trajectory()
    windows = slide_windows(t, window_s, stride_s) if windowed else []
    if not windows:
        windows = [trajectory_window(t)]
    blocks = []
    for w in windows:
        fv = extract_features(normalize_window(w))
        if fv.degenerate:
            raise DegenerateSignalError("combined trajectory has no principal motion")
        blocks.append(fv.frequency_block)
    return np.mean(blocks, axis=0)


def count_reps(m: MlpModel, c: CombinedTrajectory, windowed: bool = False) -> RepCount:
    if m.task != "regression":
        raise ValidationError(f"rep counter must be a regression model, got {m.task!r}")
    if m.n_inputs != N_FREQUENCY_FEATURES:
        raise ValidationError(f"rep counter expects {N_FREQUENCY_FEATURES} inputs, model has {m.n_inputs}")
    try:
        x = rep_features(c, windowed)
    except DegenerateSignalError:
        return RepCount(None, None, False)
    value = max(float(m.predict(x)[0]), 0.0)
    return RepCount(value, int(round(value)), True)


def quantize_window(points: np.ndarray, n_samples: int = QUANTIZED_SAMPLES) -> np.ndarray:
    """Normalize a window and resample it to ``n_samples`` points.

    Returns the flattened ``(x0, y0, x1, y1, ...)`` vector. A window that
    does not move maps to all zeros.
    """
    pts = np.asarray(points, dtype=float)
    rel = pts - pts[0]
    scale = np.hypot(rel[:, 0], rel[:, 1]).max()
    if not scale > 1e-12 * max(np.abs(pts).max(), 1.0):
        return np.zeros(2 * n_samples)
    rel = rel / scale
    if len(rel) == 1:
        return np.repeat(rel, n_samples, axis=0).ravel()
    src = np.linspace(0.0, 1.0, len(rel))
    dst = np.linspace(0.0, 1.0, n_samples)
    return np.column_stack([np.interp(dst, src, rel[:, ax]) for ax in range(2)]).ravel()


def recognition_inputs(c: CombinedTrajectory, window_s: float = DEFAULT_WINDOW_S,
                       stride_s: float = DEFAULT_STRIDE_S) -> tuple[np.ndarray, bool]:
    """Quantized windows of ``c`` as rows, and whether the short-input fallback
    (whole trajectory as one window) was used."""
    windows: list[TrajectoryWindow] = slide_windows(c.as_trajectory(), window_s, stride_s)
    if not windows:
        return quantize_window(c.points)[None, :], True
    return np.array([quantize_window(w.points) for w in windows]), False


def recognize(m: MlpModel, c: CombinedTrajectory, window_s: float = DEFAULT_WINDOW_S,
              stride_s: float = DEFAULT_STRIDE_S) -> Recognition:
    """Probability-summed vote over sliding windows; ties go to the lowest class index."""
    if m.task != "multiclass":
        raise ValidationError(f"recognizer must be a multiclass model, got {m.task!r}")
    x, fallback = recognition_inputs(c, window_s, stride_s)
    total = m.predict(x).sum(axis=0)
    probs = total / total.sum()
    label = m.classes[int(np.argmax(total))] if m.classes else int(np.argmax(total))
    return Recognition(label, probs, len(x), fallback)
