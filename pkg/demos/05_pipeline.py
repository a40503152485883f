"""
The whole pipeline from Python
==============================

Train all three models, run a scene with three exercises at two stations
plus some passers-by, and score the report against the scene's truth. The
command line does the same through ``repmotion synth/train/run/evaluate``.
"""
import json

from repmotion import synth
from repmotion.evaluation import evaluate
from repmotion.io import dumps, validate_report
from repmotion.nn import TrainConfig
from repmotion.pipeline import run_pipeline, train_models
from repmotion.training import Example
from repmotion.trajectory import BoundingBox

exercises = synth.generate_corpus(40, synth.RECOGNITION_CLASSES, seed=11, id_prefix="ex")
others = synth.generate_corpus(100, {"non_exercise": synth.NON_EXERCISE_KINDS}, seed=12, id_prefix="nx")
examples = [Example(it.trajectory, it.truth.is_exercise, it.truth.reps,
                    it.label if it.truth.is_exercise else None) for it in exercises.items + others.items]
bundle = train_models(examples, TrainConfig(max_epochs=120), seed=11)
print("held-out scores:", json.dumps(bundle.metrics, indent=1))

boxes = [BoundingBox("bench", 0, 0, 320, 480), BoundingBox("rack", 320, 0, 640, 480)]
scene = synth.generate_scene([
    synth.SceneExercise("bench", "sinusoid_y", 0.8, 40, 1.0, 14.0, 0.0, center=(100, 240)),
    synth.SceneExercise("bench", "sinusoid_y", 0.8, 40, 1.0, 14.0, 90.0, center=(220, 240)),
    synth.SceneExercise("rack", "circle", 0.6, 45, 3.0, 12.0, 30.0),
], boxes, seed=13, n_distractors=5)

report = run_pipeline(scene.trajectories, boxes, bundle, seed=11)
validate_report(report)
for c in report["clusters"]:
    print(f"{c['id']:>8s}: {len(c['members'])} segments, frames {c['start_frame']}-{c['end_frame']}, "
          f"{c['reps']['rounded']} reps, {c['recognition']['label']}")

metrics = evaluate(report, scene.truth)
print(dumps(metrics))
