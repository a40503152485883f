"""File formats: trajectories, boxes, ground truth, model bundles, reports.

Trajectories and ground truth are JSON lines; the box configuration, model
bundle and report are single JSON documents. Reports are validated against
``data/report.schema.json`` plus the cross-reference checks JSON Schema
cannot express.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

import jsonschema

from .errors import ConfigurationError, ModelError, ParseError, SchemaError, ValidationError
from .features import FEATURE_VERSION
from .nn import MlpModel
from .trajectory import (DEFAULT_MAX_LIFESPAN_S, BoundingBox, IngestResult, MotionTrajectory,
                         ingest_trajectories, validate_boxes)

REPORT_SCHEMA_VERSION = "repmotion-report/1"
BUNDLE_FORMAT = "repmotion-bundle"
BUNDLE_VERSION = 1


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, no NaN, so equal inputs give equal bytes."""
    return json.dumps(obj, sort_keys=True, allow_nan=False, indent=1) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path):
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"{path}: file not found")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg})", exc.lineno) from None


# -- trajectories ---------------------------------------------------------------


def read_trajectories(path, max_lifespan: float = DEFAULT_MAX_LIFESPAN_S, strict: bool = False) -> IngestResult:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"{path}: trajectory file not found")
    with path.open() as fh:
        return ingest_trajectories(fh, max_lifespan, strict)


def write_trajectories(path, trajectories: Iterable[MotionTrajectory]) -> None:
    with open(path, "w") as fh:
        for t in trajectories:
            fh.write(json.dumps(t.to_record()) + "\n")


# -- boxes ------------------------------------------------------------------------


def parse_boxes(doc) -> list[BoundingBox]:
    if not isinstance(doc, dict) or not isinstance(doc.get("boxes"), list):
        raise ConfigurationError('box configuration must be {"boxes": [...]}')
    boxes = []
    for i, b in enumerate(doc["boxes"]):
        try:
            boxes.append(BoundingBox(str(b["id"]), float(b["x_min"]), float(b["y_min"]),
                                     float(b["x_max"]), float(b["y_max"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"box #{i}: {exc}") from None
    if not boxes:
        raise ConfigurationError("box configuration lists no boxes")
    try:
        return validate_boxes(boxes)
    except ValidationError as exc:
        raise ConfigurationError(str(exc)) from None


def read_boxes(path) -> list[BoundingBox]:
    return parse_boxes(read_json(path))


def boxes_doc(boxes: Iterable[BoundingBox]) -> dict:
    return {"boxes": [dict(id=b.id, x_min=b.x_min, y_min=b.y_min, x_max=b.x_max, y_max=b.y_max)
                      for b in boxes]}


# -- ground truth -------------------------------------------------------------------


def parse_truth_line(raw: str, line: int) -> dict:
    try:
        rec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", line) from None
    if not isinstance(rec, dict) or ("id" in rec) == ("region" in rec):
        raise ParseError('truth record needs exactly one of "id" or "region"', line)
    for key in ("start_frame", "end_frame"):
        if key in rec and (isinstance(rec[key], bool) or not isinstance(rec[key], int)):
            raise ParseError(f"{key} must be an integer", line)
    if "reps" in rec and rec["reps"] is not None and not isinstance(rec["reps"], (int, float)):
        raise ParseError("reps must be a number", line)
    if "region" in rec and not {"start_frame", "end_frame"} <= rec.keys():
        raise ParseError("region records need start_frame and end_frame", line)
    return rec


def read_truth(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"{path}: ground-truth file not found")
    out = []
    with path.open() as fh:
        for i, raw in enumerate(fh, start=1):
            if raw.strip():
                out.append(parse_truth_line(raw, i))
    return out


def write_jsonl(path, records: Iterable[dict]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


# -- model bundle ------------------------------------------------------------------------


@dataclass
class ModelBundle:
    detector: MlpModel | None = None
    regressor: MlpModel | None = None
    recognizer: MlpModel | None = None
    feature_version: str = FEATURE_VERSION
    seed: int = 0
    config: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ModelError(f"model bundle lacks: {', '.join(missing)}")
        if self.feature_version != FEATURE_VERSION:
            raise ModelError(f"bundle built for {self.feature_version!r}, this build uses {FEATURE_VERSION!r}")

    def to_dict(self) -> dict:
        return {
            "format": BUNDLE_FORMAT,
            "version": BUNDLE_VERSION,
            "feature_version": self.feature_version,
            "seed": self.seed,
            "config": self.config,
            "metrics": self.metrics,
            **{k: (m.to_dict() if m is not None else None)
               for k, m in (("detector", self.detector), ("regressor", self.regressor),
                            ("recognizer", self.recognizer))},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelBundle":
        if not isinstance(d, dict) or d.get("format") != BUNDLE_FORMAT:
            raise ModelError("not a model bundle")
        if d.get("version") != BUNDLE_VERSION:
            raise ModelError(f"bundle version {d.get('version')!r} unsupported (expected {BUNDLE_VERSION})")
        load = lambda k: MlpModel.from_dict(d[k]) if d.get(k) is not None else None  # noqa: E731
        return cls(load("detector"), load("regressor"), load("recognizer"), d.get("feature_version", ""),
                   int(d.get("seed", 0)), dict(d.get("config", {})), dict(d.get("metrics", {})))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, allow_nan=False))

    @classmethod
    def load(cls, path) -> "ModelBundle":
        path = Path(path)
        if not path.exists():
            raise ModelError(f"{path}: model bundle not found")
        try:
            return cls.from_dict(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: invalid JSON ({exc.msg})") from None


# -- report ------------------------------------------------------------------------


def report_schema() -> dict:
    return json.loads(resources.files("repmotion").joinpath("data/report.schema.json").read_text())


def validate_report(report: dict) -> None:
    """Schema check plus id resolution and probability normalization."""
    try:
        jsonschema.validate(report, report_schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaError(f"report does not match schema at {path or '<root>'}: {exc.message}") from None
    box_ids = {b["id"] for b in report["boxes"]}
    seg_ids = {s["id"] for t in report["trajectories"] for s in t["segments"]}
    problems = []
    for c in report["clusters"]:
        if c["box_id"] not in box_ids:
            problems.append(f"cluster {c['id']}: unknown box {c['box_id']!r}")
        problems += [f"cluster {c['id']}: unknown segment {m!r}" for m in c["members"] if m not in seg_ids]
        rec = c.get("recognition")
        if rec is not None and abs(sum(rec["probabilities"].values()) - 1.0) > 1e-9:
            problems.append(f"cluster {c['id']}: probabilities do not sum to 1")
    if problems:
        raise SchemaError("; ".join(problems))
