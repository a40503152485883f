"""
Telling exercise from other motion
==================================

Train the window classifier on a balanced synthetic corpus, then smooth its
per-window decisions with a majority vote and merge them into segments.
"""
import numpy as np

from repmotion import synth
from repmotion.detect import detect, vote_smooth
from repmotion.features import window_features
from repmotion.nn import TrainConfig
from repmotion.training import Example, detection_metrics, detector_config, train_detector
from repmotion.trajectory import MotionTrajectory, slide_windows

corpus = synth.generate_corpus(100, synth.DETECTION_CLASSES, seed=0)
print(f"{len(corpus.train)} training and {len(corpus.test)} held-out trajectories")


def as_examples(items):
    return [Example(it.trajectory, it.truth.is_exercise) for it in items]


# Negative windows count double in the loss, which biases the detector
# toward missing an exercise rather than inventing one.
model = train_detector(as_examples(corpus.train), detector_config(TrainConfig(seed=0)))
print("held-out window metrics:", detection_metrics(model, as_examples(corpus.test)))

# A keypoint that walks for 4 s and then starts lifting.
walk, _ = synth.generate(synth.SynthSpec("linear_walk", frequency=2, amplitude=2, duration=4,
                                         drift_velocity=60, seed=3))
lift, _ = synth.generate(synth.SynthSpec("sinusoid_y", frequency=0.9, amplitude=30, duration=7, seed=4))
points = np.vstack([walk.points, lift.points - lift.points[0] + walk.points[-1]])
track = MotionTrajectory("mixed", 30.0, 0, points)

windows = slide_windows(track)
probs, labels, segments = detect(model, [window_features(w) for w in windows], windows)
print("\nwindow probabilities:", np.round(probs, 2))
print("after the vote:     ", labels)
for s in segments:
    print(f"segment {s.id}: frames {s.start_frame}-{s.end_frame}, confidence {s.label_confidence:.2f}")

# The tiled vote decides blocks of three; the sliding vote looks at each
# window's neighbours instead.
print("\ntiled  ", vote_smooth([1, 0, 1, 1, 0, 0, 1]))
print("sliding", vote_smooth([1, 0, 1, 1, 0, 0, 1], mode="sliding"))
