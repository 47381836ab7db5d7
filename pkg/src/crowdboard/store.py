"""Leaderboard state as a pure fold over the event log.

The Store owns the fold: commands (in pipeline.py) validate against current
state, append events, and the fold applies them. Replaying the same log
always reproduces identical state; snapshots only short-circuit the replay.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .dispatch import AnnotationBatch
from .errors import DomainError, NotFoundError
from .events import Event, FileEventLog, InMemoryEventLog
from .metrics import MetricResult
from .model import AnnotationRecord, AnnotatorProfile, Instance, Submission, TaskSpec
from .uncertainty import ScoreEstimate


@dataclass(frozen=True)
class RateLimitConfig:
    """Token bucket: `capacity` submissions, one token back per interval."""

    capacity: int = 3
    refill_interval_seconds: float = 7 * 86400 / 3

    def to_dict(self) -> dict:
        return {
            "capacity": self.capacity,
            "refill_interval_seconds": self.refill_interval_seconds,
        }


@dataclass
class AssignmentState:
    assignment_id: str
    batch_id: str
    submission_id: str
    task_id: str
    instance_id: str
    copy_index: int
    presentation_key: str
    status: str = "open"  # open | leased | complete
    annotator_id: str | None = None
    leased_at: str | None = None
    lease_expires_at: str | None = None

    def to_dict(self) -> dict:
        return {
            "assignment_id": self.assignment_id,
            "batch_id": self.batch_id,
            "submission_id": self.submission_id,
            "task_id": self.task_id,
            "instance_id": self.instance_id,
            "copy_index": self.copy_index,
            "presentation_key": self.presentation_key,
            "status": self.status,
            "annotator_id": self.annotator_id,
            "leased_at": self.leased_at,
            "lease_expires_at": self.lease_expires_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AssignmentState:
        return cls(**d)


@dataclass(frozen=True)
class LeaderboardEntry:
    submission_id: str
    submitter: str
    task_id: str
    created_at: str
    status: str
    human: dict  # aspect -> ScoreEstimate (scored submissions only)
    metrics: dict  # name -> MetricResult (validated onward)
    window: tuple[str, str] | None  # first/last annotation day tag

    def to_dict(self) -> dict:
        return {
            "submission_id": self.submission_id,
            "submitter": self.submitter,
            "task_id": self.task_id,
            "created_at": self.created_at,
            "status": self.status,
            "human": {
                aspect: {**est.to_dict(), "display": est.display()}
                for aspect, est in self.human.items()
            },
            "metrics": {name: r.to_dict() for name, r in self.metrics.items()},
            "window": list(self.window) if self.window else None,
        }


class LeaderboardState:
    """Mutable fold target; every container is JSON-serializable on demand."""

    def __init__(
        self,
        tasks: dict[str, TaskSpec],
        instances: dict[str, dict[str, Instance]],
        rate_config: RateLimitConfig = RateLimitConfig(),
    ):
        self.tasks = tasks
        self.instances = instances
        self.rate_config = rate_config
        self.submissions: dict[str, Submission] = {}
        self.violations: dict[str, list[dict]] = {}
        self.seeds: dict[str, dict[str, int]] = {}
        self.subsets: dict[str, list[str]] = {}
        self.plans: dict[str, dict] = {}
        self.metrics: dict[str, dict[str, MetricResult]] = {}
        self.metric_failures: dict[str, dict[str, str]] = {}
        self.batches: dict[str, AnnotationBatch] = {}
        self.submission_batches: dict[str, list[str]] = {}
        self.assignments: dict[str, AssignmentState] = {}
        self.annotations: dict[str, list[AnnotationRecord]] = {}
        self.gold_annotations: dict[str, list[AnnotationRecord]] = {}
        self.human_scores: dict[str, dict[str, ScoreEstimate]] = {}
        self.policies: dict[str, dict] = {}
        self.annotators: dict[str, AnnotatorProfile] = {}
        self.annotator_seen: dict[str, set[tuple[str, str]]] = {}
        self.buckets: dict[str, dict] = {}
        self.fixture_ids: set[str] = set()
        self.applied = 0

    # -- rate limiting ----------------------------------------------------

    def bucket_tokens(self, submitter: str, at: datetime) -> float:
        """Tokens the submitter would have at `at`, without consuming any."""
        bucket = self.buckets.get(submitter)
        if bucket is None:
            return float(self.rate_config.capacity)
        elapsed = (at - datetime.fromisoformat(bucket["updated_at"])).total_seconds()
        refill = max(0.0, elapsed) / self.rate_config.refill_interval_seconds
        return min(float(self.rate_config.capacity), bucket["tokens"] + refill)

    def retry_after_seconds(self, submitter: str, at: datetime) -> float:
        tokens = self.bucket_tokens(submitter, at)
        if tokens >= 1.0:
            return 0.0
        return (1.0 - tokens) * self.rate_config.refill_interval_seconds

    def _consume_token(self, submitter: str, at_iso: str) -> None:
        at = datetime.fromisoformat(at_iso)
        tokens = self.bucket_tokens(submitter, at)
        self.buckets[submitter] = {
            "tokens": max(0.0, tokens - 1.0),
            "updated_at": at_iso,
        }

    # -- queries -----------------------------------------------------------

    def task(self, task_id: str) -> TaskSpec:
        if task_id not in self.tasks:
            raise NotFoundError(f"unknown task: {task_id!r}")
        return self.tasks[task_id]

    def test_ids(self, task_id: str) -> set[str]:
        self.task(task_id)
        return {
            iid
            for iid, inst in self.instances.get(task_id, {}).items()
            if inst.split == "test"
        }

    def submission(self, submission_id: str) -> Submission:
        if submission_id not in self.submissions:
            raise NotFoundError(f"unknown submission: {submission_id!r}")
        return self.submissions[submission_id]

    def annotation_window(self, submission_id: str) -> tuple[str, str] | None:
        records = self.annotations.get(submission_id, [])
        if not records:
            return None
        days = sorted(r.day_tag for r in records)
        return days[0], days[-1]

    def entry(self, submission_id: str) -> LeaderboardEntry:
        sub = self.submission(submission_id)
        human = self.human_scores.get(submission_id, {}) if sub.status == "scored" else {}
        metrics = (
            self.metrics.get(submission_id, {})
            if sub.status not in ("received", "rejected")
            else {}
        )
        return LeaderboardEntry(
            submission_id=sub.submission_id,
            submitter=sub.submitter,
            task_id=sub.task_id,
            created_at=sub.created_at,
            status=sub.status,
            human=dict(human),
            metrics=dict(metrics),
            window=self.annotation_window(submission_id),
        )

    def leaderboard(
        self, task_id: str, sort_aspect: str | None = None
    ) -> tuple[list[LeaderboardEntry], list[LeaderboardEntry]]:
        """(scored entries ranked, unscored entries with metrics only)."""
        task = self.task(task_id)
        aspect = sort_aspect or task.aspect_names[0]
        if aspect not in task.aspect_names:
            raise DomainError(f"unknown aspect {aspect!r} for task {task_id!r}")
        scored, pending = [], []
        for sid in sorted(self.submissions):
            sub = self.submissions[sid]
            if sub.task_id != task_id or sub.status == "rejected":
                continue
            entry = self.entry(sid)
            if sub.status == "scored":
                scored.append(entry)
            else:
                pending.append(entry)
        scored.sort(
            key=lambda e: (
                -e.human[aspect].mean if aspect in e.human else 1.0,
                e.created_at,
                e.submission_id,
            )
        )
        pending.sort(key=lambda e: (e.created_at, e.submission_id))
        return scored, pending

    # -- the fold ----------------------------------------------------------

    def apply(self, event: Event) -> None:
        handler = getattr(self, f"_apply_{event.type}", None)
        if handler is None:
            raise DomainError(f"unknown event type: {event.type!r}")
        handler(event.payload)
        self.applied += 1

    def _apply_annotator_registered(self, p: dict) -> None:
        profile = AnnotatorProfile.from_dict(p["profile"])
        self.annotators[profile.annotator_id] = profile

    def _apply_submission_received(self, p: dict) -> None:
        sub = Submission.from_dict(p["submission"])
        self.submissions[sub.submission_id] = sub
        self._consume_token(sub.submitter, sub.created_at)

    def _apply_submission_validated(self, p: dict) -> None:
        sid = p["submission_id"]
        self.submissions[sid] = self.submissions[sid].advance("validated")

    def _apply_submission_rejected(self, p: dict) -> None:
        sid = p["submission_id"]
        self.submissions[sid] = self.submissions[sid].advance("rejected")
        self.violations[sid] = p.get("violations", [])

    def _apply_metrics_computed(self, p: dict) -> None:
        sid = p["submission_id"]
        self.metrics[sid] = {
            name: MetricResult.from_dict(r) for name, r in p["results"].items()
        }
        self.metric_failures[sid] = dict(p.get("failures", {}))

    def _apply_subset_sampled(self, p: dict) -> None:
        sid = p["submission_id"]
        self.submissions[sid] = self.submissions[sid].advance("sampled")
        self.subsets[sid] = list(p["subset_ids"])
        self.seeds.setdefault(sid, {})["sampling"] = p["seed"]
        if "plan" in p:
            self.plans[sid] = p["plan"]

    def _apply_batches_built(self, p: dict) -> None:
        sid = p["submission_id"]
        self.submissions[sid] = self.submissions[sid].advance("annotating")
        self.seeds.setdefault(sid, {})["permutation"] = p["seed"]
        ids = []
        for bd in p["batches"]:
            batch = AnnotationBatch.from_dict(bd)
            self.batches[batch.batch_id] = batch
            ids.append(batch.batch_id)
            for item in batch.items:
                self.assignments[item.assignment_id] = AssignmentState(
                    assignment_id=item.assignment_id,
                    batch_id=batch.batch_id,
                    submission_id=sid,
                    task_id=batch.task_id,
                    instance_id=item.instance_id,
                    copy_index=item.copy_index,
                    presentation_key=item.presentation_key,
                )
        self.submission_batches[sid] = ids

    def _apply_batch_released(self, p: dict) -> None:
        batch = self.batches[p["batch_id"]]
        d = batch.to_dict()
        d["status"] = "released"
        d["release_at"] = p["release_at"]
        self.batches[batch.batch_id] = AnnotationBatch.from_dict(d)

    def _apply_assignment_leased(self, p: dict) -> None:
        a = self.assignments[p["assignment_id"]]
        a.status = "leased"
        a.annotator_id = p["annotator_id"]
        a.leased_at = p["leased_at"]
        a.lease_expires_at = p["expires_at"]
        self.annotator_seen.setdefault(p["annotator_id"], set()).add(
            (a.submission_id, a.instance_id)
        )

    def _apply_lease_expired(self, p: dict) -> None:
        a = self.assignments[p["assignment_id"]]
        a.status = "open"
        a.annotator_id = None
        a.leased_at = None
        a.lease_expires_at = None

    def _apply_labels_recorded(self, p: dict) -> None:
        a = self.assignments[p["assignment_id"]]
        a.status = "complete"
        a.annotator_id = p["annotator_id"]
        sid = a.submission_id
        for rd in p["records"]:
            self.annotations.setdefault(sid, []).append(AnnotationRecord.from_dict(rd))
        for rd in p.get("gold_records", []):
            self.gold_annotations.setdefault(sid, []).append(
                AnnotationRecord.from_dict(rd)
            )
        self.annotator_seen.setdefault(p["annotator_id"], set()).add(
            (sid, a.instance_id)
        )
        batch = self.batches[a.batch_id]
        if all(
            self.assignments[i.assignment_id].status == "complete"
            for i in batch.items
        ):
            d = batch.to_dict()
            d["status"] = "complete"
            self.batches[batch.batch_id] = AnnotationBatch.from_dict(d)

    def _apply_submission_scored(self, p: dict) -> None:
        sid = p["submission_id"]
        self.submissions[sid] = self.submissions[sid].advance("scored")
        self.human_scores[sid] = {
            aspect: ScoreEstimate.from_dict(e) for aspect, e in p["scores"].items()
        }
        self.policies[sid] = p.get("policy", {})
        for aspect, seed in p.get("bootstrap_seeds", {}).items():
            self.seeds.setdefault(sid, {})[f"bootstrap:{aspect}"] = seed

    def _apply_fixture_entry_loaded(self, p: dict) -> None:
        sub = Submission(
            submission_id=p["submission_id"],
            task_id=p["task_id"],
            submitter=p["submitter"],
            created_at=p["created_at"],
            predictions=(),
            status="scored",
        )
        self.submissions[sub.submission_id] = sub
        self.fixture_ids.add(sub.submission_id)
        self.human_scores[sub.submission_id] = {
            aspect: ScoreEstimate.from_dict(e) for aspect, e in p["human"].items()
        }
        self.metrics[sub.submission_id] = {
            name: MetricResult.from_dict(r) for name, r in p.get("metrics", {}).items()
        }

    # -- snapshots -----------------------------------------------------------

    def to_snapshot(self) -> dict:
        return {
            "applied": self.applied,
            "submissions": {k: v.to_dict() for k, v in self.submissions.items()},
            "violations": self.violations,
            "seeds": self.seeds,
            "subsets": self.subsets,
            "plans": self.plans,
            "metrics": {
                sid: {n: r.to_dict() for n, r in d.items()}
                for sid, d in self.metrics.items()
            },
            "metric_failures": self.metric_failures,
            "batches": {k: v.to_dict() for k, v in self.batches.items()},
            "submission_batches": self.submission_batches,
            "assignments": {k: v.to_dict() for k, v in self.assignments.items()},
            "annotations": {
                sid: [r.to_dict() for r in recs]
                for sid, recs in self.annotations.items()
            },
            "gold_annotations": {
                sid: [r.to_dict() for r in recs]
                for sid, recs in self.gold_annotations.items()
            },
            "human_scores": {
                sid: {a: e.to_dict() for a, e in d.items()}
                for sid, d in self.human_scores.items()
            },
            "policies": self.policies,
            "annotators": {k: v.to_dict() for k, v in self.annotators.items()},
            "annotator_seen": {
                k: sorted(list(pair) for pair in v)
                for k, v in self.annotator_seen.items()
            },
            "buckets": self.buckets,
            "fixture_ids": sorted(self.fixture_ids),
        }

    def restore_snapshot(self, snap: dict) -> None:
        self.applied = snap["applied"]
        self.submissions = {
            k: Submission.from_dict(v) for k, v in snap["submissions"].items()
        }
        self.violations = snap["violations"]
        self.seeds = snap["seeds"]
        self.subsets = snap["subsets"]
        self.plans = snap["plans"]
        self.metrics = {
            sid: {n: MetricResult.from_dict(r) for n, r in d.items()}
            for sid, d in snap["metrics"].items()
        }
        self.metric_failures = snap["metric_failures"]
        self.batches = {
            k: AnnotationBatch.from_dict(v) for k, v in snap["batches"].items()
        }
        self.submission_batches = snap["submission_batches"]
        self.assignments = {
            k: AssignmentState.from_dict(v) for k, v in snap["assignments"].items()
        }
        self.annotations = {
            sid: [AnnotationRecord.from_dict(r) for r in recs]
            for sid, recs in snap["annotations"].items()
        }
        self.gold_annotations = {
            sid: [AnnotationRecord.from_dict(r) for r in recs]
            for sid, recs in snap["gold_annotations"].items()
        }
        self.human_scores = {
            sid: {a: ScoreEstimate.from_dict(e) for a, e in d.items()}
            for sid, d in snap["human_scores"].items()
        }
        self.policies = snap["policies"]
        self.annotators = {
            k: AnnotatorProfile.from_dict(v) for k, v in snap["annotators"].items()
        }
        self.annotator_seen = {
            k: {tuple(pair) for pair in v} for k, v in snap["annotator_seen"].items()
        }
        self.buckets = snap["buckets"]
        self.fixture_ids = set(snap["fixture_ids"])


class Store:
    """Event log + folded state, with optional snapshot acceleration."""

    def __init__(
        self,
        log: InMemoryEventLog | FileEventLog,
        tasks: dict[str, TaskSpec],
        instances: dict[str, dict[str, Instance]] | None = None,
        rate_config: RateLimitConfig = RateLimitConfig(),
        snapshot_path: str | Path | None = None,
        snapshot_every: int = 500,
    ):
        self.log = log
        self.snapshot_path = Path(snapshot_path) if snapshot_path else None
        self.snapshot_every = snapshot_every
        self.state = LeaderboardState(tasks, instances or {}, rate_config)
        start = 0
        if self.snapshot_path and self.snapshot_path.exists():
            snap = json.loads(self.snapshot_path.read_text(encoding="utf-8"))
            self.state.restore_snapshot(snap)
            start = self.state.applied
        for event in self.log.events(start=start):
            self.state.apply(event)

    def append(self, type: str, payload: dict) -> Event:
        event = self.log.append(type, payload)
        self.state.apply(event)
        if (
            self.snapshot_path
            and self.snapshot_every > 0
            and self.state.applied % self.snapshot_every == 0
        ):
            self.write_snapshot()
        return event

    def write_snapshot(self) -> None:
        if not self.snapshot_path:
            return
        tmp = self.snapshot_path.with_suffix(".tmp")
        tmp.write_text(
            json.dumps(self.state.to_snapshot(), ensure_ascii=False), encoding="utf-8"
        )
        tmp.replace(self.snapshot_path)
