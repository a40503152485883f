"""Per-window motion descriptors.

A window is trimmed of stationary jitter, normalized by its largest
translation and summarized as a fixed 27-value :class:`FeatureVector`.
The first twelve values are the frequency-based block (also fed to the
repetition regressor); the rest describe amplitude, travel and decay.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import dsp
from .errors import InsufficientDataError, NormalizationError
from .trajectory import MotionTrajectory, TrajectoryWindow

FEATURE_VERSION = "repmotion-features/1"

FEATURE_NAMES: tuple[str, ...] = (
    "zc_x",
    "zc_y",
    "zc_interval_var_x",
    "zc_interval_var_y",
    "dom_freq_hz",
    "ac_at_dominant_lag",
    "ac_max_peak",
    "freq_via_ac_hz",
    "n_ac_peaks",
    "n_prominent_peaks",
    "n_weak_peaks",
    "ac_first_peak_after_zc",
    "rms",
    "span_overall",
    "span_x",
    "span_y",
    "disp_overall_c0", "disp_overall_c1", "disp_overall_c2",
    "disp_x_c0", "disp_x_c1", "disp_x_c2",
    "disp_y_c0", "disp_y_c1", "disp_y_c2",
    "decay_slope",
    "decay_intercept",
)
N_FEATURES = len(FEATURE_NAMES)
N_FREQUENCY_FEATURES = 12
_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}

MIN_SAMPLES = 8
PROMINENCE_RATIO = 0.25
# Peaks are only searched up to this fraction of the window: the unbiased
# autocorrelation gets too noisy at longer lags.
MAX_LAG_FRACTION = 2.0 / 3.0


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (N_FEATURES,):
            raise ValueError(f"feature vector must have {N_FEATURES} values, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, name: str) -> float:
        return float(self.values[_INDEX[name]])

    def __len__(self):
        return N_FEATURES

    @property
    def frequency_block(self) -> np.ndarray:
        return self.values[:N_FREQUENCY_FEATURES]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values.tolist()))

    def to_list(self) -> list[float]:
        return self.values.tolist()

    @classmethod
    def from_list(cls, values, degenerate: bool = False) -> "FeatureVector":
        return cls(np.asarray(values, dtype=float), degenerate)


class TrimResult(NamedTuple):
    trajectory: MotionTrajectory | None
    frames: np.ndarray  # original frame indices of the retained samples
    stationary: bool


def trim_stationary(t: MotionTrajectory, min_move_px: float = 4.0) -> TrimResult:
    """Drop samples that moved less than ``min_move_px`` from the last kept one.

    The first sample is always kept. Retained samples keep their original
    frame numbers in ``frames``; ``trajectory`` packs them consecutively.
    Fewer than two survivors means the keypoint never really moved.
    """
    if min_move_px < 0:
        raise ValueError("min_move_px must be >= 0")
    pts = t.points
    keep = [0]
    last = pts[0]
    for i in range(1, len(pts)):
        if np.hypot(*(pts[i] - last)) >= min_move_px:
            keep.append(i)
            last = pts[i]
    keep = np.asarray(keep)
    frames = t.start_frame + keep
    trimmed = MotionTrajectory(t.id, t.fps, t.start_frame, pts[keep])
    return TrimResult(trimmed, frames, len(keep) < 2)


def max_translation(points: np.ndarray) -> float:
    return float(np.hypot(*(points - points[0]).T).max()) if len(points) else 0.0


def normalize_window(w: TrajectoryWindow) -> TrajectoryWindow:
    """Shift to the window's first point and divide by the largest translation."""
    scale = max_translation(w.points)
    if not scale > 1e-12 * max(np.abs(w.points).max(), 1.0):
        raise NormalizationError(f"window of {w.source_id!r} at frame {w.window_start_frame} does not move")
    return TrajectoryWindow(w.source_id, w.window_start_frame, w.length_frames, w.fps,
                            (w.points - w.points[0]) / scale)


def principal_signal(points: np.ndarray) -> np.ndarray | None:
    """Projection of centred positions on their first principal axis.

    The axis sign is fixed so its largest component is positive. Returns
    ``None`` when the positions do not vary.
    """
    centred = points - points.mean(axis=0)
    _, s, vt = np.linalg.svd(centred, full_matrices=False)
    if s[0] <= 1e-12 * max(np.abs(points).max(), 1.0) * np.sqrt(len(points)):
        return None
    axis = vt[0]
    if axis[np.argmax(np.abs(axis))] < 0:
        axis = -axis
    return centred @ axis


def _interval_variance(crossings: np.ndarray, fps: float) -> float:
    if len(crossings) < 3:
        return 0.0
    return float(np.var(np.diff(crossings) / fps))


def _span(points: np.ndarray) -> float:
    diff = points[:, None, :] - points[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=-1)).max())


def _decay(sig: np.ndarray, fps: float, dom_hz: float) -> tuple[float, float]:
    """Line through the per-period maxima of ``|sig|`` (the envelope)."""
    mag = np.abs(sig)
    t = np.arange(len(sig)) / fps
    period = int(round(fps / dom_hz)) if dom_hz > 0 else len(sig)
    if period < 1 or len(sig) // period < 2:
        fit = dsp.polyfit(t, mag, 1)
    else:
        starts = np.arange(0, len(sig), period)
        at = np.array([s + np.argmax(mag[s:s + period]) for s in starts])
        env = np.interp(np.arange(len(sig)), at, mag[at])
        fit = dsp.polyfit(t, env, 1)
    return float(fit.coefficients[1]), float(fit.coefficients[0])


def _autocorr_block(sig: np.ndarray, fps: float, dom_hz: float) -> list[float]:
    """Features 6-12 from the unbiased autocorrelation of ``sig``."""
    n = len(sig)
    r = dsp.autocorrelation(sig, unbiased=True)
    max_lag = max(int(n * MAX_LAG_FRACTION), 3)
    r_search = r[:max_lag + 1]

    lag_dom = int(round(fps / dom_hz)) if dom_hz > 0 else 0
    ac_dom = float(r[lag_dom]) if 0 < lag_dom < n else 0.0

    peaks = dsp.find_peaks(r_search, PROMINENCE_RATIO)
    heights = peaks.all.heights
    if len(heights):
        ac_max = float(heights.max())
        # first peak close to the maximum, so harmonics of the period do not win
        first = np.flatnonzero(heights >= ac_max - 0.1 * abs(ac_max))[0]
        freq_ac = fps / peaks.all.indices[first]
    else:
        ac_max, freq_ac = 0.0, 0.0

    first_zero = _first_zero_crossing(r_search)
    after = peaks.all.indices > first_zero if first_zero is not None else np.zeros(len(heights), bool)
    first_after = float(heights[after][0]) if after.any() else 0.0

    return [ac_dom, ac_max, float(freq_ac), float(len(peaks.all)), float(len(peaks.prominent)),
            float(len(peaks.weak)), first_after]


def _first_zero_crossing(r: np.ndarray) -> int | None:
    below = np.flatnonzero(r <= 0)
    return int(below[0]) if len(below) else None


def extract_features(w: TrajectoryWindow) -> FeatureVector:
    """27-value descriptor of a (normalized) window.

    Zero-crossing features use the x and y coordinates separately; the
    spectral, autocorrelation, RMS and decay features use the principal
    signal. If the window has no positional variance those are zero and the
    vector is flagged degenerate.
    """
    pts = np.asarray(w.points, dtype=float)
    n = len(pts)
    if n < MIN_SAMPLES:
        raise InsufficientDataError(f"need >= {MIN_SAMPLES} samples per window, got {n}")
    fps = w.fps
    x, y = pts[:, 0], pts[:, 1]

    zcx, cx = dsp.zero_crossings(x)
    zcy, cy = dsp.zero_crossings(y)
    out = [float(zcx), float(zcy), _interval_variance(cx, fps), _interval_variance(cy, fps)]

    sig = principal_signal(pts)
    degenerate = sig is None
    if degenerate:
        out += [0.0] * 9
    else:
        dom = dsp.dominant_frequency(sig, fps)
        out.append(dom.hz)
        out += _autocorr_block(sig, fps, dom.hz)
        out.append(float(np.sqrt(np.mean(sig ** 2))))

    out += [_span(pts), float(np.ptp(x)), float(np.ptp(y))]

    t = np.arange(n) / fps
    rel = pts - pts[0]
    for disp in (np.hypot(rel[:, 0], rel[:, 1]), np.abs(rel[:, 0]), np.abs(rel[:, 1])):
        out += dsp.polyfit(t, disp, 2).coefficients.tolist()

    if degenerate:
        out += [0.0, 0.0]
    else:
        out += list(_decay(sig, fps, out[_INDEX["dom_freq_hz"]]))

    return FeatureVector(np.asarray(out), degenerate)


def window_features(w: TrajectoryWindow) -> FeatureVector:
    """Normalize then extract; the usual entry point for raw windows."""
    return extract_features(normalize_window(w))


def trajectory_window(t: MotionTrajectory) -> TrajectoryWindow:
    """The whole trajectory viewed as a single window."""
    return TrajectoryWindow(t.id, t.start_frame, len(t.points), t.fps, t.points)
