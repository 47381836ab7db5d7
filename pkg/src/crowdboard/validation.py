"""Submission intake: prediction-file parsing and coverage validation."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import PredictionParseError
from .model import TaskSpec


@dataclass(frozen=True)
class Violation:
    rule: str  # "missing" | "unknown_id" | "empty_prediction"
    instance_id: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.instance_id}"

    def to_dict(self) -> dict:
        return {"rule": self.rule, "instance_id": self.instance_id}


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}


def parse_prediction_file(source: str | Path | io.TextIOBase) -> dict[str, str]:
    """Parse a line-delimited prediction upload.

    One JSON object per line with fields "id" and "prediction". A plain str
    is treated as upload content; pass a Path to read from disk. Raises
    PredictionParseError with the offending line number on malformed input.
    """
    if isinstance(source, io.TextIOBase):
        lines = source.read().splitlines()
    elif isinstance(source, Path):
        lines = source.read_text(encoding="utf-8").splitlines()
    else:
        lines = source.splitlines()

    predictions: dict[str, str] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise PredictionParseError(f"invalid JSON ({exc.msg})", line=lineno) from exc
        if not isinstance(obj, dict) or "id" not in obj or "prediction" not in obj:
            raise PredictionParseError(
                'record must have "id" and "prediction" fields', line=lineno
            )
        iid = obj["id"]
        if not isinstance(iid, str) or not isinstance(obj["prediction"], str):
            raise PredictionParseError("id and prediction must be strings", line=lineno)
        if iid in predictions:
            raise PredictionParseError(f"duplicate id {iid!r}", line=lineno)
        predictions[iid] = obj["prediction"]
    return predictions


def validate_submission(
    predictions: dict[str, str], task: TaskSpec, test_ids: set[str]
) -> ValidationReport:
    """Check that predictions cover the evaluation ids exactly and non-emptily.

    ok iff every test id has a prediction, there are no unknown ids, and no
    prediction is empty or whitespace-only. Violations name the id and rule.
    """
    if not test_ids:
        raise ValueError("test_ids must be non-empty")
    violations: list[Violation] = []
    for iid in sorted(test_ids - predictions.keys()):
        violations.append(Violation("missing", iid))
    for iid in sorted(predictions.keys() - test_ids):
        violations.append(Violation("unknown_id", iid))
    for iid in sorted(predictions.keys() & test_ids):
        if not predictions[iid].strip():
            violations.append(Violation("empty_prediction", iid))
    return ValidationReport(ok=not violations, violations=tuple(violations))
