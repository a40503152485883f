"""Trajectory domain model, JSON-lines ingestion and sliding windows.

A :class:`MotionTrajectory` is the path of one tracked keypoint, sampled once
per frame. Everything downstream (windows, segments, clusters) refers back to
trajectories by id and frame index.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ParseError, ValidationError

DEFAULT_MAX_LIFESPAN_S = 11.0
DEFAULT_WINDOW_S = 5.0
DEFAULT_STRIDE_S = 1.0


def _frozen_points(points) -> np.ndarray:
    arr = np.array(points, dtype=float)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError(f"points must be an (n, 2) sequence, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MotionTrajectory:
    """One keypoint's path; point ``k`` belongs to frame ``start_frame + k``."""

    id: str
    fps: float
    start_frame: int
    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen_points(self.points))
        if not (isinstance(self.fps, (int, float)) and math.isfinite(self.fps) and self.fps > 0):
            raise ValidationError(f"trajectory {self.id!r}: fps must be > 0, got {self.fps!r}")
        if int(self.start_frame) != self.start_frame or self.start_frame < 0:
            raise ValidationError(f"trajectory {self.id!r}: start_frame must be a non-negative integer")
        object.__setattr__(self, "start_frame", int(self.start_frame))
        if len(self.points) == 0:
            raise ValidationError(f"trajectory {self.id!r}: no points")
        if not np.all(np.isfinite(self.points)):
            raise ValidationError(f"trajectory {self.id!r}: non-finite coordinates")

    def __len__(self):
        return len(self.points)

    @property
    def duration(self) -> float:
        return len(self.points) / self.fps

    @property
    def end_frame(self) -> int:
        """Last frame index (inclusive)."""
        return self.start_frame + len(self.points) - 1

    @property
    def frames(self) -> np.ndarray:
        return np.arange(self.start_frame, self.start_frame + len(self.points))

    def slice_frames(self, first: int, last: int) -> np.ndarray:
        """Points for frames ``first..last`` inclusive (clipped to the trajectory)."""
        lo = max(first - self.start_frame, 0)
        hi = min(last - self.start_frame + 1, len(self.points))
        return self.points[lo:hi]

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "fps": self.fps,
            "start_frame": self.start_frame,
            "points": self.points.tolist(),
        }


@dataclass(frozen=True, eq=False)
class TrajectoryWindow:
    source_id: str
    window_start_frame: int
    length_frames: int
    fps: float
    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen_points(self.points))

    @property
    def window_end_frame(self) -> int:
        return self.window_start_frame + self.length_frames - 1


@dataclass(frozen=True)
class ExerciseSegment:
    """A maximal run of positively classified windows on one trajectory.

    ``end_frame`` is inclusive (last frame of the last member window).
    """

    source_id: str
    start_frame: int
    end_frame: int
    windows: tuple[int, ...]
    label_confidence: float

    def __post_init__(self):
        if not self.start_frame < self.end_frame:
            raise ValidationError("segment start_frame must precede end_frame")

    @property
    def id(self) -> str:
        return f"{self.source_id}#{self.start_frame}"

    @property
    def n_frames(self) -> int:
        return self.end_frame - self.start_frame + 1


@dataclass(frozen=True)
class BoundingBox:
    id: str
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValidationError(f"box {self.id!r}: requires x_min < x_max and y_min < y_max")

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def overlaps(self, other: "BoundingBox") -> bool:
        # shared edges are allowed
        return (self.x_min < other.x_max and other.x_min < self.x_max
                and self.y_min < other.y_max and other.y_min < self.y_max)


def validate_boxes(boxes: Iterable[BoundingBox]) -> list[BoundingBox]:
    boxes = list(boxes)
    ids = [b.id for b in boxes]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate box ids")
    for i, a in enumerate(boxes):
        for b in boxes[i + 1:]:
            if a.overlaps(b):
                raise ValidationError(f"boxes {a.id!r} and {b.id!r} overlap")
    return boxes


@dataclass(frozen=True, eq=False)
class CombinedTrajectory:
    """Duration-weighted average path of a cluster, Hann smoothed."""

    fps: float
    start_frame: int
    points: np.ndarray
    gap_filled: bool = False

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen_points(self.points))

    @property
    def end_frame(self) -> int:
        return self.start_frame + len(self.points) - 1

    @property
    def duration(self) -> float:
        return len(self.points) / self.fps

    def as_trajectory(self, id: str = "combined") -> MotionTrajectory:
        return MotionTrajectory(id, self.fps, self.start_frame, self.points)


@dataclass(frozen=True)
class ExerciseCluster:
    id: str
    box_id: str
    member_segments: tuple[str, ...]
    combined: CombinedTrajectory = field(repr=False)
    start_frame: int
    end_frame: int


# ---------------------------------------------------------------------------
# ingestion


class Rejection(NamedTuple):
    id: str
    line: int
    reason: str


class IngestResult(NamedTuple):
    accepted: list
    rejected: list
    errors: list

    @property
    def total(self) -> int:
        return len(self.accepted) + len(self.rejected) + len(self.errors)


def parse_record(obj, line: int | None = None) -> MotionTrajectory:
    """Build a trajectory from one decoded JSON object.

    Structural problems raise :class:`ParseError`; well-formed records that
    break a trajectory invariant raise :class:`ValidationError`.
    """
    if not isinstance(obj, dict):
        raise ParseError("record is not a JSON object", line)
    missing = [k for k in ("id", "fps", "start_frame", "points") if k not in obj]
    if missing:
        raise ParseError(f"missing field(s) {', '.join(missing)}", line)
    tid = obj["id"]
    if not isinstance(tid, str) or not tid:
        raise ParseError("id must be a non-empty string", line)
    fps, start = obj["fps"], obj["start_frame"]
    if isinstance(fps, bool) or not isinstance(fps, (int, float)):
        raise ParseError("fps must be a number", line)
    if isinstance(start, bool) or not isinstance(start, int):
        raise ParseError("start_frame must be an integer", line)
    pts = obj["points"]
    if not isinstance(pts, list) or not all(
        isinstance(p, list) and len(p) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p)
        for p in pts
    ):
        raise ParseError("points must be a list of [x, y] number pairs", line)
    return MotionTrajectory(tid, float(fps), start, pts if pts else np.empty((0, 2)))


def ingest_trajectories(lines: Iterable[str], max_lifespan: float = DEFAULT_MAX_LIFESPAN_S,
                        strict: bool = False) -> IngestResult:
    """Parse JSON-lines trajectory records.

    Every non-blank line ends up in exactly one of ``accepted``,
    ``rejected`` (valid JSON that violates an invariant, including the
    lifespan cap) or ``errors`` (unparseable). Input order is preserved.
    With ``strict=True`` the first problem is raised instead.
    """
    accepted, rejected, errors = [], [], []
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", lineno) from None
            try:
                traj = parse_record(obj, lineno)
            except ParseError:
                raise
            except ValidationError as exc:
                if strict:
                    raise ValidationError(f"line {lineno}: {exc}") from None
                rejected.append(Rejection(str(obj.get("id")), lineno, str(exc)))
                continue
        except ParseError as exc:
            if strict:
                raise
            errors.append(exc)
            continue
        if traj.duration > max_lifespan:
            reason = (f"trajectory {traj.id!r}: duration {traj.duration:.3f} s exceeds "
                      f"max lifespan {max_lifespan:g} s")
            if strict:
                raise ValidationError(reason)
            rejected.append(Rejection(traj.id, lineno, reason))
            continue
        accepted.append(traj)
    return IngestResult(accepted, rejected, errors)


def window_frames(fps: float, window_s: float, stride_s: float) -> tuple[int, int]:
    win = max(int(round(window_s * fps)), 1)
    stride = max(int(round(stride_s * fps)), 1)
    return win, stride


def slide_windows(t: MotionTrajectory, window_s: float = DEFAULT_WINDOW_S,
                  stride_s: float = DEFAULT_STRIDE_S) -> list[TrajectoryWindow]:
    """Fixed-length windows fully contained in ``t``; empty if ``t`` is too short."""
    if window_s <= 0 or stride_s <= 0:
        raise ValueError("window_s and stride_s must be positive")
    win, stride = window_frames(t.fps, window_s, stride_s)
    n = len(t.points)
    if n < win:
        return []
    count = (n - win) // stride + 1
    return [
        TrajectoryWindow(t.id, t.start_frame + k * stride, win, t.fps,
                         t.points[k * stride:k * stride + win].copy())
        for k in range(count)
    ]
