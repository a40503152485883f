import numpy as np
import pytest

from repmotion import synth
from repmotion.io import ModelBundle
from repmotion.nn import TrainConfig
from repmotion.pipeline import train_models
from repmotion.training import Example
from repmotion.trajectory import MotionTrajectory, TrajectoryWindow


def tone(freq, seconds=5.0, fps=30.0, amp=1.0, phase=0.0):
    t = np.arange(int(round(seconds * fps))) / fps
    return amp * np.sin(2 * np.pi * freq * t + phase)


def window_from(points, fps=30.0, source="w", start=0):
    points = np.asarray(points, dtype=float)
    return TrajectoryWindow(source, start, len(points), fps, points)


def traj_from(points, fps=30.0, tid="t", start=0):
    return MotionTrajectory(tid, fps, start, np.asarray(points, dtype=float))


def corpus_examples(n_per_kind=30, n_non=60, seed=0):
    ex = synth.generate_corpus(n_per_kind, synth.RECOGNITION_CLASSES, seed, id_prefix="e")
    non = synth.generate_corpus(n_non, {synth.NON_EXERCISE_LABEL: synth.NON_EXERCISE_KINDS}, seed + 1,
                                id_prefix="n")
    return [Example(it.trajectory, it.truth.is_exercise, it.truth.reps,
                    it.truth.label if it.truth.is_exercise else None) for it in ex.items + non.items]


@pytest.fixture(scope="session")
def bundle() -> ModelBundle:
    """A small but usable set of trained models shared by the slower tests."""
    return train_models(corpus_examples(), TrainConfig(max_epochs=150), seed=3)


# filled by test_acceptance.py, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
