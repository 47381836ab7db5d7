"""Annotation dispatch: qualification checks, batch building, scheduling.

Paired tasks get a per-item presentation key (which panel holds the gold
text) drawn from a logged seed. The key stays server-side: item payloads
sent to annotation backends or the UI never contain it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, time, timedelta
from zoneinfo import ZoneInfo, ZoneInfoNotFoundError

from .clock import Clock
from .errors import ConfigError, DomainError, InconsistencyError
from .model import AnnotatorProfile, Instance, Submission, TaskSpec
from .rng import make_generator

DEFAULT_BATCH_SIZE = 20
DEFAULT_LEASE_SECONDS = 30 * 60

WEEKDAYS = range(5)  # Monday..Friday


@dataclass(frozen=True)
class QualificationRule:
    """Worker quality bar: locale allowlist, track record, qual test."""

    allowed_locales: frozenset[str] = frozenset({"US", "CA", "GB", "AU"})
    min_hits: int = 5000
    min_approval: float = 0.99
    requires_qual_test: bool = True

    def __post_init__(self):
        if self.min_hits < 0:
            raise DomainError("min_hits must be >= 0")
        if not 0.0 <= self.min_approval <= 1.0:
            raise DomainError("min_approval must be in [0, 1]")
        if not isinstance(self.allowed_locales, frozenset):
            object.__setattr__(self, "allowed_locales", frozenset(self.allowed_locales))

    def to_dict(self) -> dict:
        return {
            "allowed_locales": sorted(self.allowed_locales),
            "min_hits": self.min_hits,
            "min_approval": self.min_approval,
            "requires_qual_test": self.requires_qual_test,
        }


@dataclass(frozen=True)
class Eligibility:
    eligible: bool
    reasons: tuple[str, ...] = ()


def qualify(
    profile: AnnotatorProfile, rule: QualificationRule, task_id: str
) -> Eligibility:
    """Check a worker against the rule; reasons list every failed check."""
    reasons = []
    if profile.locale not in rule.allowed_locales:
        reasons.append("locale")
    if profile.hits_completed < rule.min_hits:
        reasons.append("min_hits")
    if profile.approval_rate < rule.min_approval:
        reasons.append("min_approval")
    if rule.requires_qual_test and task_id not in profile.passed_qual_tests:
        reasons.append("qual_test")
    return Eligibility(eligible=not reasons, reasons=tuple(reasons))


@dataclass(frozen=True)
class BatchItem:
    """One annotation assignment: an instance presented to one annotator."""

    assignment_id: str
    instance_id: str
    copy_index: int
    prompt: str
    candidates: tuple[str, ...]  # panel texts in display order
    presentation_key: str  # server-side only
    inputs: tuple[tuple[str, str], ...] = ()  # instance fields, no references

    def to_payload(self) -> dict:
        """Annotator-facing form; the presentation key is deliberately absent."""
        return {
            "assignment_id": self.assignment_id,
            "instance_id": self.instance_id,
            "prompt": self.prompt,
            "candidates": list(self.candidates),
            "inputs": dict(self.inputs),
        }

    def to_dict(self) -> dict:
        return {
            "assignment_id": self.assignment_id,
            "instance_id": self.instance_id,
            "copy_index": self.copy_index,
            "prompt": self.prompt,
            "candidates": list(self.candidates),
            "presentation_key": self.presentation_key,
            "inputs": dict(self.inputs),
        }

    @classmethod
    def from_dict(cls, d: dict) -> BatchItem:
        return cls(
            assignment_id=d["assignment_id"],
            instance_id=d["instance_id"],
            copy_index=d["copy_index"],
            prompt=d["prompt"],
            candidates=tuple(d["candidates"]),
            presentation_key=d["presentation_key"],
            inputs=tuple((k, v) for k, v in d.get("inputs", {}).items()),
        )


@dataclass(frozen=True)
class AnnotationBatch:
    batch_id: str
    submission_id: str
    task_id: str
    scheme: str
    items: tuple[BatchItem, ...]
    release_at: str | None = None  # ISO-8601
    status: str = "pending"  # pending | released | complete

    def to_dict(self) -> dict:
        return {
            "batch_id": self.batch_id,
            "submission_id": self.submission_id,
            "task_id": self.task_id,
            "scheme": self.scheme,
            "items": [i.to_dict() for i in self.items],
            "release_at": self.release_at,
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AnnotationBatch:
        return cls(
            batch_id=d["batch_id"],
            submission_id=d["submission_id"],
            task_id=d["task_id"],
            scheme=d["scheme"],
            items=tuple(BatchItem.from_dict(i) for i in d["items"]),
            release_at=d.get("release_at"),
            status=d.get("status", "pending"),
        )


def render_prompt(
    task: TaskSpec, instance: Instance, prediction: str, presentation_key: str
) -> tuple[str, tuple[str, ...]]:
    """Fill the task's prompt template; returns (text, panel candidates)."""
    fields = dict(instance.input_fields)
    if task.paired_with_gold:
        if not instance.references:
            raise ConfigError(
                f"paired task {task.task_id!r} needs a reference for "
                f"instance {instance.instance_id!r}"
            )
        gold = instance.references[0]
        if presentation_key == "A-gold":
            candidates = (gold, prediction)
        elif presentation_key == "B-gold":
            candidates = (prediction, gold)
        else:
            raise DomainError(
                f"paired task requires a paired presentation key, got "
                f"{presentation_key!r}"
            )
        fields["candidate_a"], fields["candidate_b"] = candidates
    else:
        if presentation_key != "unpaired":
            raise DomainError("unpaired task cannot use a paired presentation key")
        candidates = (prediction,)
        fields["candidate"] = prediction
        if instance.references:
            fields.setdefault("reference", instance.references[0])
    try:
        text = task.prompt_template.format(**fields)
    except (KeyError, IndexError) as exc:
        raise ConfigError(
            f"prompt template for task {task.task_id!r} references a missing "
            f"field: {exc}"
        ) from exc
    return text, candidates


def build_batches(
    submission: Submission,
    subset_ids: list[str],
    task: TaskSpec,
    k: int,
    seed: int,
    instances: dict[str, Instance],
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> list[AnnotationBatch]:
    """Split the sampled subset into annotation batches of k copies each.

    Every instance appears in exactly k assignments (covering all task
    aspects). Paired tasks draw each item's gold position uniformly from the
    given seed.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    if batch_size < 1:
        raise DomainError("batch_size must be >= 1")
    predictions = submission.prediction_map
    missing = [iid for iid in subset_ids if iid not in predictions]
    if missing:
        raise InconsistencyError(f"subset ids missing predictions: {missing[:5]}")
    unknown = [iid for iid in subset_ids if iid not in instances]
    if unknown:
        raise InconsistencyError(f"subset ids not in instance store: {unknown[:5]}")

    rng = make_generator(seed)
    items: list[BatchItem] = []
    for iid in subset_ids:
        instance = instances[iid]
        for copy in range(k):
            if task.paired_with_gold:
                key = "A-gold" if rng.integers(0, 2) == 0 else "B-gold"
            else:
                key = "unpaired"
            prompt, candidates = render_prompt(task, instance, predictions[iid], key)
            items.append(
                BatchItem(
                    assignment_id=f"{submission.submission_id}:{iid}:{copy}",
                    instance_id=iid,
                    copy_index=copy,
                    prompt=prompt,
                    candidates=candidates,
                    presentation_key=key,
                    inputs=instance.input_fields,
                )
            )

    batches = []
    for b, start in enumerate(range(0, len(items), batch_size)):
        batches.append(
            AnnotationBatch(
                batch_id=f"{submission.submission_id}:b{b:04d}",
                submission_id=submission.submission_id,
                task_id=task.task_id,
                scheme=task.elicitation.kind,
                items=tuple(items[start : start + batch_size]),
            )
        )
    return batches


@dataclass(frozen=True)
class ScheduleConfig:
    """Fixed publish slot: weekdays at a set local time."""

    timezone: str = "America/Los_Angeles"
    hour: int = 10
    minute: int = 0

    def zone(self) -> ZoneInfo:
        try:
            return ZoneInfo(self.timezone)
        except (ZoneInfoNotFoundError, ValueError) as exc:
            raise ConfigError(f"unknown timezone {self.timezone!r}") from exc

    def to_dict(self) -> dict:
        return {"timezone": self.timezone, "hour": self.hour, "minute": self.minute}


def next_release_time(schedule: ScheduleConfig, clock: Clock) -> datetime:
    """Next weekday at the configured local time, never in the past."""
    zone = schedule.zone()
    now_local = clock.now().astimezone(zone)
    candidate = datetime.combine(
        now_local.date(), time(schedule.hour, schedule.minute), tzinfo=zone
    )
    while candidate < now_local or candidate.weekday() not in WEEKDAYS:
        candidate = datetime.combine(
            candidate.date() + timedelta(days=1),
            time(schedule.hour, schedule.minute),
            tzinfo=zone,
        )
    return candidate


def schedule_release(
    batch: AnnotationBatch, schedule: ScheduleConfig, clock: Clock
) -> str:
    """ISO timestamp of the batch's release slot."""
    if batch.status != "pending":
        raise DomainError(f"batch {batch.batch_id} already {batch.status}")
    return next_release_time(schedule, clock).isoformat()


def local_day_tag(moment: datetime, schedule: ScheduleConfig) -> str:
    """Calendar date of a moment in the schedule's timezone (YYYY-MM-DD)."""
    return moment.astimezone(schedule.zone()).date().isoformat()


def mark_released(batch: AnnotationBatch, release_at: str) -> AnnotationBatch:
    return replace(batch, status="released", release_at=release_at)
