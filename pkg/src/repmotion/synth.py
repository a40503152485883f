"""Synthetic keypoint trajectories with analytic ground truth.

Periodic kinds stand in for exercises (their repetition count is exactly
``frequency * duration``); ``random_walk`` and ``linear_walk`` are the
non-exercise confounds. ``linear_walk`` is a fast drift with a small gait
bob, i.e. periodic but displaced, which is what the displacement features
are there to catch.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import ValidationError
from .trajectory import BoundingBox, MotionTrajectory

EXERCISE_KINDS = ("sinusoid_x", "sinusoid_y", "circle", "figure_eight", "bounce_drift")
NON_EXERCISE_KINDS = ("random_walk", "linear_walk")
KINDS = EXERCISE_KINDS + NON_EXERCISE_KINDS
NON_EXERCISE_LABEL = "non_exercise"


@dataclass(frozen=True)
class SynthSpec:
    kind: str
    frequency: float = 1.0  # Hz
    amplitude: float = 40.0  # px; diffusion px/sqrt(s) for random_walk
    duration: float = 8.0  # s
    fps: float = 30.0
    phase: float = 0.0  # deg
    noise_std: float = 0.0  # px
    drift_velocity: float = 0.0  # px/s
    drift_angle: float = 0.0  # deg, direction of the drift
    center: tuple[float, float] = (320.0, 240.0)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown synthetic kind {self.kind!r}; expected one of {KINDS}")
        if self.fps <= 0 or self.duration <= 0:
            raise ValidationError("fps and duration must be positive")


@dataclass(frozen=True)
class SynthTruth:
    is_exercise: bool
    reps: float
    label: str
    phase: float

    def to_record(self, traj_id: str, start_frame: int, end_frame: int) -> dict:
        return {"id": traj_id, "class": self.label if self.is_exercise else NON_EXERCISE_LABEL,
                "start_frame": start_frame, "end_frame": end_frame, "reps": self.reps}


def signal_xy(spec: SynthSpec, t: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
    """Noise-free positions at times ``t`` (random_walk needs ``rng``)."""
    w = 2 * np.pi * spec.frequency
    ph = math.radians(spec.phase)
    a = spec.amplitude
    s = np.sin(w * t + ph)
    zero = np.zeros_like(t)
    if spec.kind == "sinusoid_x":
        dx, dy = a * s, zero
    elif spec.kind in ("sinusoid_y", "bounce_drift", "linear_walk"):
        dx, dy = zero, a * s
    elif spec.kind == "circle":
        dx, dy = a * np.cos(w * t + ph), a * s
    elif spec.kind == "figure_eight":
        dx, dy = a * s, 0.5 * a * np.sin(2 * (w * t + ph))
    else:  # random_walk
        step = a / math.sqrt(spec.fps)
        walk = np.cumsum(rng.normal(0.0, step, size=(len(t), 2)), axis=0)
        dx, dy = walk[:, 0] - walk[0, 0], walk[:, 1] - walk[0, 1]
    ang = math.radians(spec.drift_angle)
    dx = dx + spec.drift_velocity * math.cos(ang) * t
    dy = dy + spec.drift_velocity * math.sin(ang) * t
    return np.column_stack((spec.center[0] + dx, spec.center[1] + dy))


def truth_for(spec: SynthSpec, duration: float | None = None) -> SynthTruth:
    duration = spec.duration if duration is None else duration
    is_ex = spec.kind in EXERCISE_KINDS
    return SynthTruth(is_ex, spec.frequency * duration if is_ex else 0.0, spec.kind, spec.phase)


def generate(spec: SynthSpec, traj_id: str = "synth", start_frame: int = 0) -> tuple[MotionTrajectory, SynthTruth]:
    """Render ``spec`` into a trajectory; deterministic for a given ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    n = max(int(round(spec.duration * spec.fps)), 1)
    t = np.arange(n) / spec.fps
    pts = signal_xy(spec, t, rng)
    if spec.noise_std > 0:
        pts = pts + rng.normal(0.0, spec.noise_std, size=pts.shape)
    return MotionTrajectory(traj_id, spec.fps, start_frame, pts), truth_for(spec, n / spec.fps)


# ---------------------------------------------------------------------------
# corpora


@dataclass(frozen=True)
class ParamRanges:
    """Uniform sampling ranges; ``noise`` is a fraction of the amplitude."""

    frequency: tuple[float, float] = (0.4, 1.5)
    amplitude: tuple[float, float] = (20.0, 60.0)
    duration: tuple[float, float] = (5.0, 11.0)
    noise: tuple[float, float] = (0.0, 0.1)
    drift: tuple[float, float] = (0.0, 0.0)


DEFAULT_RANGES: dict[str, ParamRanges] = {
    **{k: ParamRanges() for k in EXERCISE_KINDS},
    "bounce_drift": ParamRanges(drift=(3.0, 8.0)),
    "linear_walk": ParamRanges(frequency=(1.5, 2.5), amplitude=(1.0, 4.0), noise=(0.1, 0.5),
                               drift=(30.0, 80.0)),
    "random_walk": ParamRanges(amplitude=(5.0, 25.0), noise=(0.02, 0.1)),
}

DETECTION_CLASSES = {"exercise": EXERCISE_KINDS, NON_EXERCISE_LABEL: NON_EXERCISE_KINDS}
RECOGNITION_CLASSES = {k: (k,) for k in EXERCISE_KINDS}


def sample_spec(kind: str, rng: np.random.Generator, ranges: Mapping[str, ParamRanges] | None = None,
                fps: float = 30.0) -> SynthSpec:
    r = (ranges or DEFAULT_RANGES).get(kind) or DEFAULT_RANGES[kind]
    u = lambda lo_hi: float(rng.uniform(*lo_hi))  # noqa: E731
    amp = u(r.amplitude)
    # bounce_drift travels sideways, everything else in any direction
    angle = float(rng.choice([0.0, 180.0])) if kind == "bounce_drift" else u((0.0, 360.0))
    return SynthSpec(
        kind=kind, frequency=u(r.frequency), amplitude=amp, duration=u(r.duration), fps=fps,
        phase=u((0.0, 360.0)), noise_std=u(r.noise) * amp, drift_velocity=u(r.drift),
        drift_angle=angle,
        center=(u((100.0, 540.0)), u((100.0, 380.0))),
        seed=int(rng.integers(0, 2**31 - 1)),
    )


class SynthItem(NamedTuple):
    trajectory: MotionTrajectory
    truth: SynthTruth
    spec: SynthSpec
    label: str  # corpus class


@dataclass
class Corpus:
    items: list[SynthItem]
    train_idx: np.ndarray
    test_idx: np.ndarray
    classes: tuple[str, ...] = field(default=())

    def subset(self, idx) -> list[SynthItem]:
        return [self.items[i] for i in idx]

    @property
    def train(self) -> list[SynthItem]:
        return self.subset(self.train_idx)

    @property
    def test(self) -> list[SynthItem]:
        return self.subset(self.test_idx)


def generate_corpus(n_per_class: int, classes: Mapping[str, Sequence[str]] = DETECTION_CLASSES,
                    seed: int = 0, ranges: Mapping[str, ParamRanges] | None = None,
                    test_fraction: float = 0.2, fps: float = 30.0, id_prefix: str = "syn") -> Corpus:
    """Balanced labelled corpus with a stratified, seed-determined split.

    Each class cycles through its kinds so every kind is equally represented.
    Item ``i`` is drawn from its own child seed, so the corpus is a pure
    function of ``(n_per_class, classes, ranges, seed)``.
    """
    if n_per_class < 1:
        raise ValidationError("n_per_class must be >= 1")
    names = tuple(classes)
    children = np.random.SeedSequence(seed).spawn(n_per_class * len(names))
    items = []
    for ci, name in enumerate(names):
        kinds = tuple(classes[name])
        for j in range(n_per_class):
            rng = np.random.default_rng(children[ci * n_per_class + j])
            spec = sample_spec(kinds[j % len(kinds)], rng, ranges, fps)
            traj, truth = generate(spec, f"{id_prefix}{len(items):05d}")
            items.append(SynthItem(traj, truth, spec, name))
    split_rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(n_per_class * len(names) + 1)[-1])
    test = []
    for ci in range(len(names)):
        idx = np.arange(ci * n_per_class, (ci + 1) * n_per_class)
        n_test = int(round(test_fraction * n_per_class))
        test.extend(split_rng.permutation(idx)[:n_test].tolist())
    test_idx = np.array(sorted(test), dtype=int)
    train_idx = np.setdiff1d(np.arange(len(items)), test_idx)
    return Corpus(items, train_idx, test_idx, names)


# ---------------------------------------------------------------------------
# multi-person scenes


@dataclass(frozen=True)
class SceneExercise:
    """One person exercising at a station, seen through several keypoints."""

    box: str
    kind: str
    frequency: float
    amplitude: float
    start_s: float
    duration_s: float
    phase: float = 0.0
    n_keypoints: int = 3
    center: tuple[float, float] | None = None  # defaults to the box centre
    noise_std: float = 1.0
    drift_velocity: float = 0.0


@dataclass
class Scene:
    trajectories: list[MotionTrajectory]
    truth: list[dict]  # per-trajectory and per-exercise ground truth records
    boxes: list[BoundingBox]


def _pieces(start: int, stop: int, piece: int, step: int) -> list[tuple[int, int]]:
    """Overlapping [a, b) frame ranges covering [start, stop)."""
    out = []
    a = start
    while True:
        b = min(a + piece, stop)
        out.append((a, b))
        if b >= stop:
            return out
        a += step


def generate_scene(exercises: Sequence[SceneExercise], boxes: Sequence[BoundingBox], seed: int = 0,
                   fps: float = 30.0, lifespan_s: float = 10.0, n_distractors: int = 0,
                   scene_s: float | None = None) -> Scene:
    """Render several exercisers plus non-exercise distractors.

    Each keypoint lives at most ``lifespan_s``; long exercises are covered by
    a relay of keypoints that overlap by 40% of their lifespan, mimicking a
    tracker that keeps spawning new points on the moving body part.
    """
    rng = np.random.default_rng(seed)
    box_by_id = {b.id: b for b in boxes}
    trajectories: list[MotionTrajectory] = []
    truth: list[dict] = []
    piece = int(round(lifespan_s * fps))
    step = max(int(round(0.6 * piece)), 1)
    for ei, ex in enumerate(exercises):
        center = ex.center or box_by_id[ex.box].center
        f0 = int(round(ex.start_s * fps))
        f1 = f0 + int(round(ex.duration_s * fps))
        for k in range(ex.n_keypoints):
            offset = rng.uniform(-8.0, 8.0, size=2)
            gain = rng.uniform(0.8, 1.0)
            # stagger relays per keypoint so their hand-overs do not coincide
            lag = k * step // max(ex.n_keypoints, 1)
            for a, b in _pieces(f0 - lag, f1, piece, step):
                a = max(a, f0)
                if b - a < 2:
                    continue
                spec = SynthSpec(ex.kind, ex.frequency, ex.amplitude * gain, (b - a) / fps, fps,
                                 ex.phase, 0.0, ex.drift_velocity, 0.0,
                                 (center[0] + offset[0], center[1] + offset[1]))
                t = (np.arange(a, b) - f0) / fps
                pts = signal_xy(spec, t) + rng.normal(0.0, ex.noise_std, size=(b - a, 2))
                tid = f"ex{ei}_kp{k}_{a}"
                trajectories.append(MotionTrajectory(tid, fps, a, pts))
                truth.append({"id": tid, "class": ex.kind, "start_frame": a, "end_frame": b - 1,
                              "reps": ex.frequency * (b - a) / fps})
        truth.append({"region": ex.box, "class": ex.kind, "start_frame": f0, "end_frame": f1 - 1,
                      "reps": ex.frequency * ex.duration_s})
    horizon = scene_s if scene_s is not None else max(
        [e.start_s + e.duration_s for e in exercises] + [lifespan_s])
    for d in range(n_distractors):
        kind = NON_EXERCISE_KINDS[d % 2]
        spec = sample_spec(kind, rng, fps=fps)
        dur = min(spec.duration, lifespan_s)
        start = int(rng.integers(0, max(int((horizon - dur) * fps), 1)))
        spec = replace(spec, duration=dur)
        traj, _ = generate(spec, f"distractor{d}", start)
        trajectories.append(traj)
        truth.append({"id": traj.id, "class": NON_EXERCISE_LABEL, "start_frame": start,
                      "end_frame": traj.end_frame, "reps": 0.0})
    return Scene(trajectories, truth, list(boxes))


def write_jsonl(path, records) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def spec_record(spec: SynthSpec) -> dict:
    d = asdict(spec)
    d["center"] = list(spec.center)
    return d


def phase_split_scene(offset_deg: float, seed: int = 0, duration_s: float = 12.0) -> Scene:
    """Two people doing the same exercise at the same rate in one box,
    ``offset_deg`` apart in phase. Kind, rate, amplitude and base phase are
    drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    freq = float(rng.uniform(0.5, 1.5))
    amp = float(rng.uniform(25.0, 50.0))
    kind = str(rng.choice(["sinusoid_x", "sinusoid_y", "circle"]))
    phase = float(rng.uniform(0.0, 360.0))
    box = BoundingBox("station", 0.0, 0.0, 400.0, 400.0)
    people = [SceneExercise(box.id, kind, freq, amp, 0.0, duration_s, phase, center=(150.0, 200.0)),
              SceneExercise(box.id, kind, freq, amp, 0.0, duration_s, phase + offset_deg, center=(250.0, 200.0))]
    return generate_scene(people, [box], seed)
