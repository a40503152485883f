"""
Counting repetitions and naming the exercise
============================================

The rep counter regresses the count from the 12 frequency features of a
combined trajectory. The recognizer classifies resampled 5 s windows and
adds up their class probabilities.
"""
import numpy as np

from repmotion import synth
from repmotion.analytics import count_reps, recognize
from repmotion.nn import TrainConfig
from repmotion.training import single_cluster, train_recognizer, train_regressor

corpus = synth.generate_corpus(60, synth.RECOGNITION_CLASSES, seed=5)
train = [(single_cluster(it.trajectory), it) for it in corpus.train]

counter = train_regressor([c for c, _ in train], [it.truth.reps for _, it in train], TrainConfig(seed=5))
recognizer = train_recognizer([c for c, _ in train], [it.label for _, it in train], TrainConfig(seed=5))

errors, hits = [], []
for it in corpus.test:
    combined = single_cluster(it.trajectory)
    est = count_reps(counter, combined)
    rec = recognize(recognizer, combined)
    errors.append(est.value - it.truth.reps)
    hits.append(rec.label == it.label)
errors = np.array(errors)
print(f"rep error on {len(errors)} held-out tracks: mean abs {np.abs(errors).mean():.2f}, "
      f"worst {np.abs(errors).max():.2f}")
print(f"recognition accuracy: {np.mean(hits):.2f}")

# A single example in detail.
spec = synth.SynthSpec("figure_eight", frequency=0.7, amplitude=40, duration=10, noise_std=2, seed=9)
track, truth = synth.generate(spec, "demo")
combined = single_cluster(track)
rec = recognize(recognizer, combined)
print(f"\nfigure eight, {truth.reps:.1f} true reps -> counted {count_reps(counter, combined).rounded}")
for label, p in zip(recognizer.classes, rec.probabilities):
    print(f"  {label:>13s} {p:.3f}")
