"""Shared data model: tasks, instances, submissions, annotations, annotators.

All types are immutable values (frozen dataclasses) so they are safe to share
across threads. Every type round-trips through ``to_dict``/``from_dict`` for
the event log and the HTTP layer.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any

from .errors import DomainError

LIKERT5_LABELS = (
    "strongly-disagree",
    "disagree",
    "neutral",
    "agree",
    "strongly-agree",
)
BINARY_LABELS = ("no", "yes")

SUBMISSION_STATUSES = (
    "received",
    "validated",
    "sampled",
    "annotating",
    "scored",
    "rejected",
)

PRESENTATION_KEYS = ("A-gold", "B-gold", "unpaired")


@dataclass(frozen=True)
class ElicitationScheme:
    """Response format shown to annotators: a 5-point Likert scale or yes/no."""

    kind: str  # "likert5" | "binary"
    category_labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("likert5", "binary"):
            raise DomainError(f"unknown elicitation kind: {self.kind!r}")
        if not self.category_labels:
            default = LIKERT5_LABELS if self.kind == "likert5" else BINARY_LABELS
            object.__setattr__(self, "category_labels", default)
        expected = 5 if self.kind == "likert5" else 2
        if len(self.category_labels) != expected:
            raise DomainError(
                f"{self.kind} needs exactly {expected} categories, "
                f"got {len(self.category_labels)}"
            )

    @property
    def n_categories(self) -> int:
        return len(self.category_labels)

    def validate_label(self, index: int) -> int:
        if not isinstance(index, int) or isinstance(index, bool):
            raise DomainError(f"label must be an integer index, got {index!r}")
        if not 0 <= index < self.n_categories:
            raise DomainError(
                f"label index {index} out of range for {self.kind} "
                f"(0..{self.n_categories - 1})"
            )
        return index

    def to_dict(self) -> dict:
        return {"kind": self.kind, "category_labels": list(self.category_labels)}

    @classmethod
    def from_dict(cls, d: dict) -> ElicitationScheme:
        return cls(kind=d["kind"], category_labels=tuple(d.get("category_labels", ())))


@dataclass(frozen=True)
class AspectSpec:
    """One evaluated quality dimension (e.g. fluency) with its prompt text."""

    name: str
    question: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "question": self.question}

    @classmethod
    def from_dict(cls, d: dict) -> AspectSpec:
        return cls(name=d["name"], question=d.get("question", ""))


@dataclass(frozen=True)
class TaskSpec:
    """Per-task evaluation recipe: what to elicit, from how many instances."""

    task_id: str
    name: str
    elicitation: ElicitationScheme
    aspects: tuple[AspectSpec, ...]
    eval_sample_size: int
    per_instance_cost: float
    paired_with_gold: bool = False
    blind_permutation: bool = False
    instructions: str = ""
    prompt_template: str = ""

    def __post_init__(self):
        if self.eval_sample_size < 1:
            raise DomainError("eval_sample_size must be >= 1")
        if self.per_instance_cost < 0:
            raise DomainError("per_instance_cost must be >= 0")
        if not self.aspects:
            raise DomainError(f"task {self.task_id!r} has no aspects")
        names = [a.name for a in self.aspects]
        if len(set(names)) != len(names):
            raise DomainError(f"duplicate aspect names in task {self.task_id!r}")
        if self.blind_permutation and not self.paired_with_gold:
            raise DomainError("blind_permutation requires paired_with_gold")

    @property
    def aspect_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.aspects)

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "name": self.name,
            "elicitation": self.elicitation.to_dict(),
            "aspects": [a.to_dict() for a in self.aspects],
            "eval_sample_size": self.eval_sample_size,
            "per_instance_cost": self.per_instance_cost,
            "paired_with_gold": self.paired_with_gold,
            "blind_permutation": self.blind_permutation,
            "instructions": self.instructions,
            "prompt_template": self.prompt_template,
        }

    @classmethod
    def from_dict(cls, d: dict) -> TaskSpec:
        return cls(
            task_id=d["task_id"],
            name=d["name"],
            elicitation=ElicitationScheme.from_dict(d["elicitation"]),
            aspects=tuple(AspectSpec.from_dict(a) for a in d["aspects"]),
            eval_sample_size=d["eval_sample_size"],
            per_instance_cost=d["per_instance_cost"],
            paired_with_gold=d.get("paired_with_gold", False),
            blind_permutation=d.get("blind_permutation", False),
            instructions=d.get("instructions", ""),
            prompt_template=d.get("prompt_template", ""),
        )


@dataclass(frozen=True)
class Instance:
    """One evaluation item: inputs shown to annotators plus gold references."""

    instance_id: str
    input_fields: tuple[tuple[str, str], ...]  # ordered (name, text) pairs
    references: tuple[str, ...] = ()
    split: str = "test"

    def __post_init__(self):
        if self.split not in ("train", "dev", "test"):
            raise DomainError(f"unknown split: {self.split!r}")
        if isinstance(self.input_fields, dict):
            object.__setattr__(self, "input_fields", tuple(self.input_fields.items()))

    @property
    def inputs(self) -> dict[str, str]:
        return dict(self.input_fields)

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "input_fields": dict(self.input_fields),
            "references": list(self.references),
            "split": self.split,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Instance:
        return cls(
            instance_id=d["instance_id"],
            input_fields=tuple(d["input_fields"].items()),
            references=tuple(d.get("references", ())),
            split=d.get("split", "test"),
        )


@dataclass(frozen=True)
class Submission:
    """A developer's prediction file plus its lifecycle status."""

    submission_id: str
    task_id: str
    submitter: str
    created_at: str  # ISO-8601 UTC
    predictions: tuple[tuple[str, str], ...]  # ordered (instance_id, text)
    status: str = "received"

    def __post_init__(self):
        if self.status not in SUBMISSION_STATUSES:
            raise DomainError(f"unknown status: {self.status!r}")
        if isinstance(self.predictions, dict):
            object.__setattr__(self, "predictions", tuple(self.predictions.items()))

    @property
    def prediction_map(self) -> dict[str, str]:
        return dict(self.predictions)

    def advance(self, new_status: str) -> Submission:
        """Move to ``new_status``, enforcing the monotone lifecycle order."""
        order = SUBMISSION_STATUSES
        if new_status not in order:
            raise DomainError(f"unknown status: {new_status!r}")
        if new_status == "rejected":
            if self.status not in ("received", "validated"):
                raise DomainError(
                    f"cannot reject a submission in status {self.status!r}"
                )
        elif order.index(new_status) <= order.index(self.status):
            raise DomainError(
                f"status may only advance: {self.status!r} -> {new_status!r}"
            )
        return replace(self, status=new_status)

    def to_dict(self) -> dict:
        return {
            "submission_id": self.submission_id,
            "task_id": self.task_id,
            "submitter": self.submitter,
            "created_at": self.created_at,
            "predictions": dict(self.predictions),
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Submission:
        return cls(
            submission_id=d["submission_id"],
            task_id=d["task_id"],
            submitter=d["submitter"],
            created_at=d["created_at"],
            predictions=tuple(d["predictions"].items()),
            status=d.get("status", "received"),
        )


@dataclass(frozen=True)
class AnnotationRecord:
    """One elicited label for one (instance, aspect)."""

    submission_id: str
    instance_id: str
    aspect: str
    annotator_id: str
    raw_label: int
    scheme: str  # "likert5" | "binary"
    day_tag: str  # calendar date, YYYY-MM-DD
    presentation_key: str = "unpaired"
    elapsed: float | None = None

    def __post_init__(self):
        if self.scheme not in ("likert5", "binary"):
            raise DomainError(f"unknown scheme: {self.scheme!r}")
        n = 5 if self.scheme == "likert5" else 2
        if not 0 <= self.raw_label < n:
            raise DomainError(
                f"raw_label {self.raw_label} invalid for scheme {self.scheme}"
            )
        if self.presentation_key not in PRESENTATION_KEYS:
            raise DomainError(f"unknown presentation_key: {self.presentation_key!r}")

    def to_dict(self) -> dict:
        return {
            "submission_id": self.submission_id,
            "instance_id": self.instance_id,
            "aspect": self.aspect,
            "annotator_id": self.annotator_id,
            "raw_label": self.raw_label,
            "scheme": self.scheme,
            "day_tag": self.day_tag,
            "presentation_key": self.presentation_key,
            "elapsed": self.elapsed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AnnotationRecord:
        return cls(
            submission_id=d["submission_id"],
            instance_id=d["instance_id"],
            aspect=d["aspect"],
            annotator_id=d["annotator_id"],
            raw_label=d["raw_label"],
            scheme=d["scheme"],
            day_tag=d["day_tag"],
            presentation_key=d.get("presentation_key", "unpaired"),
            elapsed=d.get("elapsed"),
        )


@dataclass(frozen=True)
class AnnotatorProfile:
    """Crowdworker track record used for qualification checks."""

    annotator_id: str
    locale: str = "US"
    hits_completed: int = 0
    approval_rate: float = 1.0
    passed_qual_tests: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.hits_completed < 0:
            raise DomainError("hits_completed must be >= 0")
        if not 0.0 <= self.approval_rate <= 1.0:
            raise DomainError("approval_rate must be in [0, 1]")
        if not isinstance(self.passed_qual_tests, frozenset):
            object.__setattr__(
                self, "passed_qual_tests", frozenset(self.passed_qual_tests)
            )

    def to_dict(self) -> dict:
        return {
            "annotator_id": self.annotator_id,
            "locale": self.locale,
            "hits_completed": self.hits_completed,
            "approval_rate": self.approval_rate,
            "passed_qual_tests": sorted(self.passed_qual_tests),
        }

    @classmethod
    def from_dict(cls, d: dict) -> AnnotatorProfile:
        return cls(
            annotator_id=d["annotator_id"],
            locale=d.get("locale", "US"),
            hits_completed=d.get("hits_completed", 0),
            approval_rate=d.get("approval_rate", 1.0),
            passed_qual_tests=frozenset(d.get("passed_qual_tests", ())),
        )


def dump_any(value: Any) -> Any:
    """Best-effort to_dict for nested model values (used by the event log)."""
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if isinstance(value, (list, tuple)):
        return [dump_any(v) for v in value]
    if isinstance(value, dict):
        return {k: dump_any(v) for k, v in value.items()}
    return value
