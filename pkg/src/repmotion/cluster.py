"""Group exercise segments into per-person clusters.

Segments are first bucketed by station bounding box. Inside a box, two
segments are linked when they overlap in time, oscillate at the same
frequency and are (nearly) in phase; each connected component of that graph
is one exercise, summarized by its combined trajectory.
"""
from __future__ import annotations

import math
import re
from collections import deque
from typing import Mapping, Sequence

import numpy as np

from . import dsp
from .errors import ConfigurationError
from .trajectory import (BoundingBox, CombinedTrajectory, ExerciseCluster, ExerciseSegment,
                         MotionTrajectory)

DEFAULT_PHASE_THRESHOLD_DEG = 15.0
DEFAULT_MIN_OVERLAP_S = 2.0
DEFAULT_HANN_WINDOW_S = 1.0


def natural_key(s: str):
    return [(0, int(p), "") if p.isdigit() else (1, 0, p) for p in re.split(r"(\d+)", str(s)) if p]


def segment_track(seg: ExerciseSegment, traj: MotionTrajectory) -> MotionTrajectory:
    """The part of ``traj`` covered by ``seg``, as a trajectory of its own."""
    return MotionTrajectory(seg.id, traj.fps, seg.start_frame, traj.slice_frames(seg.start_frame, seg.end_frame))


def assign_to_boxes(segments: Sequence[ExerciseSegment], trajectories: Mapping[str, MotionTrajectory],
                    boxes: Sequence[BoundingBox]) -> dict[str, list[ExerciseSegment]]:
    """Bucket segments by the box holding their spatial centroid.

    Centroids outside every box go to the box with the nearest centre. Ties
    (including a centroid on a shared edge) go to the lowest box id.
    """
    if not boxes:
        raise ConfigurationError("no bounding boxes configured")
    ordered = sorted(boxes, key=lambda b: natural_key(b.id))
    centers = np.array([b.center for b in ordered])
    out: dict[str, list[ExerciseSegment]] = {b.id: [] for b in ordered}
    for seg in segments:
        cx, cy = segment_track(seg, trajectories[seg.source_id]).points.mean(axis=0)
        inside = [b for b in ordered if b.contains(cx, cy)]
        if inside:
            box = inside[0]
        else:
            d = np.hypot(centers[:, 0] - cx, centers[:, 1] - cy)
            box = ordered[int(np.flatnonzero(d <= d.min() * (1 + 1e-12))[0])]
        out[box.id].append(seg)
    return out


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    den = math.sqrt(float(a @ a) * float(b @ b))
    return float(a @ b) / den if den > 0 else 0.0


def cross_correlation(a: np.ndarray, b: np.ndarray, max_lag: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalized correlation of ``a[t]`` with ``b[t + lag]`` over the shared samples."""
    n = len(a)
    lags = np.arange(-max_lag, max_lag + 1)
    c = np.array([_pearson(a[max(0, -l):n - max(0, l)], b[max(0, l):n - max(0, -l)]) for l in lags])
    return lags, c


def _shared_overlap(a: MotionTrajectory, b: MotionTrajectory):
    lo = max(a.start_frame, b.start_frame)
    hi = min(a.end_frame, b.end_frame)
    if hi < lo:
        return None
    return a.slice_frames(lo, hi), b.slice_frames(lo, hi)


def phase_difference(a: MotionTrajectory, b: MotionTrajectory,
                     min_overlap_s: float = DEFAULT_MIN_OVERLAP_S) -> float | None:
    """Phase offset in degrees, folded into [0, 180], or ``None``.

    Both tracks are projected on the principal axis of their pooled,
    individually normalized motion over the shared frames. ``None`` means
    the pair cannot be compared: too little overlap (less than
    ``min_overlap_s`` or one period), no motion, or dominant frequencies
    more than one spectral bin apart.
    """
    if a.fps != b.fps:
        raise ValueError("tracks must share a frame rate")
    fps = a.fps
    ov = _shared_overlap(a, b)
    if ov is None:
        return None
    pa, pb = ov
    n = len(pa)
    if n < max(8, int(round(min_overlap_s * fps))):
        return None
    ca, cb = pa - pa.mean(axis=0), pb - pb.mean(axis=0)
    na, nb = np.linalg.norm(ca), np.linalg.norm(cb)
    tiny = 1e-9 * max(np.abs(pa).max(), np.abs(pb).max(), 1.0) * math.sqrt(n)
    if na <= tiny or nb <= tiny:
        return None
    _, _, vt = np.linalg.svd(np.vstack((ca / na, cb / nb)), full_matrices=False)
    axis = vt[0]
    sa, sb = ca @ axis, cb @ axis
    if dsp.is_flat(sa, 1e-6) or dsp.is_flat(sb, 1e-6):
        return None
    fa, fb = dsp.dominant_frequency(sa, fps), dsp.dominant_frequency(sb, fps)
    if not (fa.periodic and fb.periodic):
        return None
    bin_hz = fps / n
    if abs(fa.hz - fb.hz) > bin_hz * (1 + 1e-9):
        return None
    if n < fps / (0.5 * (fa.hz + fb.hz)):
        return None
    f = 0.5 * (dsp.refined_frequency(sa, fps) + dsp.refined_frequency(sb, fps))
    period = fps / f
    # any phase in [0, 180] is reachable within half a period; a wider search
    # lets the next cycle's peak (a whole period away) win on noise
    max_lag = max(1, min(int(math.ceil(period / 2)), n // 2))
    lags, c = cross_correlation(sa, sb, max_lag)
    k = int(np.argmax(c))
    lag = float(lags[k])
    if 0 < k < len(c) - 1:
        # parabolic refinement of the correlation peak
        den = c[k - 1] - 2 * c[k] + c[k + 1]
        if den < 0:
            lag += 0.5 * (c[k - 1] - c[k + 1]) / den
    phase = abs(360.0 * lag * f / fps) % 360.0
    return 360.0 - phase if phase > 180.0 else phase


def build_adjacency(tracks: Sequence[MotionTrajectory], threshold_deg: float = DEFAULT_PHASE_THRESHOLD_DEG,
                    min_overlap_s: float = DEFAULT_MIN_OVERLAP_S) -> np.ndarray:
    """Symmetric boolean adjacency: edge iff the phase difference is defined
    and at most ``threshold_deg``."""
    n = len(tracks)
    adj = np.eye(n, dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            ph = phase_difference(tracks[i], tracks[j], min_overlap_s)
            if ph is not None and ph <= threshold_deg:
                adj[i, j] = adj[j, i] = True
    return adj


def connected_components(adj) -> list[list[int]]:
    """Maximal connected vertex sets, each sorted, ordered by smallest member."""
    adj = np.asarray(adj, dtype=bool)
    n = len(adj)
    seen = np.zeros(n, dtype=bool)
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        comp, queue = [start], deque([start])
        while queue:
            u = queue.popleft()
            for v in np.flatnonzero(adj[u] | adj[:, u]):
                if not seen[v]:
                    seen[v] = True
                    comp.append(int(v))
                    queue.append(v)
        comps.append(sorted(comp))
    return comps


def combine_cluster(tracks: Sequence[MotionTrajectory], hann_window_s: float = DEFAULT_HANN_WINDOW_S
                    ) -> CombinedTrajectory:
    """Frame-wise mean position of the members alive at each frame, smoothed.

    Frames no member covers are filled by linear interpolation and the
    result is flagged ``gap_filled``. Both axes are then Hann smoothed.
    """
    if not tracks:
        raise ValueError("a cluster needs at least one member")
    fps = tracks[0].fps
    lo = min(t.start_frame for t in tracks)
    hi = max(t.end_frame for t in tracks)
    total = np.zeros((hi - lo + 1, 2))
    count = np.zeros(hi - lo + 1)
    for t in tracks:
        s = t.start_frame - lo
        total[s:s + len(t.points)] += t.points
        count[s:s + len(t.points)] += 1
    alive = count > 0
    mean = np.zeros_like(total)
    mean[alive] = total[alive] / count[alive, None]
    gap = not alive.all()
    if gap:
        idx = np.arange(len(count))
        for ax in range(2):
            mean[~alive, ax] = np.interp(idx[~alive], idx[alive], mean[alive, ax])
    smooth = np.column_stack([dsp.hann_smooth(mean[:, ax], fps, hann_window_s) for ax in range(2)])
    return CombinedTrajectory(fps, lo, smooth, gap)


def cluster_segments(segments: Sequence[ExerciseSegment], trajectories: Mapping[str, MotionTrajectory],
                     boxes: Sequence[BoundingBox], threshold_deg: float = DEFAULT_PHASE_THRESHOLD_DEG,
                     min_overlap_s: float = DEFAULT_MIN_OVERLAP_S,
                     hann_window_s: float = DEFAULT_HANN_WINDOW_S) -> list[ExerciseCluster]:
    """Full clustering: boxes, phase adjacency, components, combined tracks."""
    clusters = []
    for box_id, segs in assign_to_boxes(segments, trajectories, boxes).items():
        segs = sorted(segs, key=lambda s: (s.start_frame, natural_key(s.source_id)))
        tracks = [segment_track(s, trajectories[s.source_id]) for s in segs]
        adj = build_adjacency(tracks, threshold_deg, min_overlap_s)
        for k, comp in enumerate(connected_components(adj)):
            members = [tracks[i] for i in comp]
            combined = combine_cluster(members, hann_window_s)
            clusters.append(ExerciseCluster(
                f"{box_id}/{k}", box_id, tuple(segs[i].id for i in comp), combined,
                combined.start_frame, combined.end_frame))
    return clusters
