"""Repetitive-motion analytics from 2-D keypoint trajectories.

Detects exercise-like motion in short tracked trajectories, groups the
trajectories belonging to one exercise, then counts repetitions and
recognizes the exercise type.
"""
__version__ = "0.1.0"

from .errors import (ConfigurationError, DegenerateSignalError, InsufficientDataError, ModelError,
                     ParseError, RepMotionError, SchemaError, ValidationError)
from .trajectory import (BoundingBox, CombinedTrajectory, ExerciseCluster, ExerciseSegment, MotionTrajectory,
                         TrajectoryWindow, ingest_trajectories, slide_windows)
from .features import FEATURE_NAMES, FeatureVector, extract_features, window_features
from .nn import MlpModel, TrainConfig, gradient_check
from .detect import FilterConfig
from .cluster import cluster_segments
from .analytics import count_reps, recognize
from .io import ModelBundle, validate_report
from .pipeline import PipelineConfig, run_pipeline, train_models
from .evaluation import evaluate

__all__ = [
    "__version__", "RepMotionError", "ValidationError", "ParseError", "ConfigurationError", "SchemaError",
    "ModelError", "InsufficientDataError", "DegenerateSignalError",
    "MotionTrajectory", "TrajectoryWindow", "ExerciseSegment", "BoundingBox", "CombinedTrajectory",
    "ExerciseCluster", "ingest_trajectories", "slide_windows",
    "FEATURE_NAMES", "FeatureVector", "extract_features", "window_features",
    "MlpModel", "TrainConfig", "gradient_check", "FilterConfig", "cluster_segments",
    "count_reps", "recognize", "ModelBundle", "validate_report", "PipelineConfig", "run_pipeline",
    "train_models", "evaluate",
]
