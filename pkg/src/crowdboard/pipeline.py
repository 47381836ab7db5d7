"""Pipeline orchestration: validate -> sample -> dispatch -> aggregate -> CI.

The Platform is the single logical owner of the event log; every mutation
goes through its lock, and every step is idempotent (a crash between events
leaves the submission at its last durable stage). Each stage's randomness
uses a seed derived from the master seed and the submission id, so a whole
run is replayable bit-for-bit.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

from .aggregation import DEFAULT_POLICY, AggregationPolicy, score_submission
from .clock import Clock, SystemClock, VirtualClock
from .dispatch import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_LEASE_SECONDS,
    QualificationRule,
    ScheduleConfig,
    build_batches,
    local_day_tag,
    next_release_time,
    qualify,
)
from .errors import (
    AuthorizationError,
    ConfigError,
    DomainError,
    MetricUnavailableError,
    NotFoundError,
    RateLimitedError,
    StaleLeaseError,
)
from .external_metrics import AdapterConfig, external_metric
from .metrics import score_corpus
from .model import AnnotationRecord, AnnotatorProfile, Submission, TaskSpec
from .pool import AnnotationBackend, LabelSubmission
from .rng import derive_seed
from .store import Store
from .uncertainty import DEFAULT_RESAMPLES, ScoreEstimate, bootstrap_ci, se_upper_bound
from .validation import parse_prediction_file, validate_submission


@dataclass(frozen=True)
class PlatformConfig:
    master_seed: int = 0
    policy: AggregationPolicy = DEFAULT_POLICY
    resamples: int = DEFAULT_RESAMPLES
    ci_level: float = 0.95
    batch_size: int = DEFAULT_BATCH_SIZE
    lease_seconds: float = DEFAULT_LEASE_SECONDS
    schedule: ScheduleConfig = ScheduleConfig()
    qualification: QualificationRule = QualificationRule()
    adapters: tuple[AdapterConfig, ...] = ()


@dataclass(frozen=True)
class SubmitResult:
    submission_id: str
    status: str  # "validated" | "rejected"
    violations: tuple[dict, ...] = ()

    def to_dict(self) -> dict:
        return {
            "submission_id": self.submission_id,
            "status": self.status,
            "violations": list(self.violations),
        }


class Platform:
    """Commands over the store; reads fold state, writes events."""

    def __init__(
        self,
        store: Store,
        config: PlatformConfig = PlatformConfig(),
        clock: Clock | None = None,
        backend: AnnotationBackend | None = None,
    ):
        self.store = store
        self.config = config
        self.clock = clock or SystemClock()
        self.backend = backend
        self._lock = threading.RLock()
        profiles = getattr(backend, "profiles", None)
        if profiles:
            for profile in profiles:
                self.register_annotator(profile)
        if backend is not None:
            self._reoffer_open_items()

    def _reoffer_open_items(self) -> None:
        """Hand released-but-unfinished items back to a freshly attached
        backend (its queue is not part of the durable state)."""
        for bid in sorted(self.state.batches):
            batch = self.state.batches[bid]
            if batch.status != "released":
                continue
            items = [
                item.to_payload()
                for item in batch.items
                if self.state.assignments[item.assignment_id].status == "open"
            ]
            if items:
                self.backend.release(
                    {"batch_id": batch.batch_id, "items": items},
                    self.state.task(batch.task_id),
                )

    @property
    def state(self):
        return self.store.state

    # -- annotators ---------------------------------------------------------

    def register_annotator(self, profile: AnnotatorProfile) -> None:
        with self._lock:
            existing = self.state.annotators.get(profile.annotator_id)
            if existing == profile:
                return
            self.store.append("annotator_registered", {"profile": profile.to_dict()})

    # -- submission intake ---------------------------------------------------

    def submit(
        self, task_id: str, submitter: str, prediction_payload: str | Path | dict
    ) -> SubmitResult:
        """Accept a prediction upload: rate-limit, validate, compute metrics.

        Raises RateLimitedError before anything is persisted; validation
        failures persist the submission as rejected and return the
        violations.
        """
        with self._lock:
            task = self.state.task(task_id)
            if not self.state.test_ids(task_id):
                raise ConfigError(
                    f"no test instances loaded for task {task_id!r}; "
                    "provide an instances file"
                )
            now = self.clock.now()
            if self.state.bucket_tokens(submitter, now) < 1.0:
                raise RateLimitedError(self.state.retry_after_seconds(submitter, now))
            if isinstance(prediction_payload, dict):
                predictions = dict(prediction_payload)
            else:
                predictions = parse_prediction_file(prediction_payload)

            submission_id = f"sub-{len(self.state.submissions) + 1:06d}"
            submission = Submission(
                submission_id=submission_id,
                task_id=task_id,
                submitter=submitter,
                created_at=now.isoformat(),
                predictions=tuple(sorted(predictions.items())),
            )
            self.store.append(
                "submission_received", {"submission": submission.to_dict()}
            )

            report = validate_submission(predictions, task, self.state.test_ids(task_id))
            if not report.ok:
                violations = [v.to_dict() for v in report.violations]
                self.store.append(
                    "submission_rejected",
                    {"submission_id": submission_id, "violations": violations},
                )
                return SubmitResult(submission_id, "rejected", tuple(violations))

            self.store.append(
                "submission_validated", {"submission_id": submission_id}
            )
            results, failures = self._compute_metrics(task_id, predictions)
            self.store.append(
                "metrics_computed",
                {
                    "submission_id": submission_id,
                    "results": {name: r.to_dict() for name, r in results.items()},
                    "failures": failures,
                },
            )
            return SubmitResult(submission_id, "validated")

    def _compute_metrics(self, task_id: str, predictions: dict[str, str]):
        instances = self.state.instances.get(task_id, {})
        ids = sorted(self.state.test_ids(task_id))
        hypotheses = [predictions[iid] for iid in ids]
        reference_lists = [list(instances[iid].references) for iid in ids]
        results = score_corpus(hypotheses, reference_lists)
        failures: dict[str, str] = {}
        for adapter in self.config.adapters:
            try:
                results[adapter.name] = external_metric(
                    adapter, hypotheses, reference_lists, ids=ids
                )
            except MetricUnavailableError as exc:
                failures[adapter.name] = str(exc)
        return results, failures

    # -- pipeline steps --------------------------------------------------------

    def run_pipeline_step(self, clock: Clock | None = None) -> dict:
        """Advance every submission one ready stage; safe to call repeatedly."""
        clk = clock or self.clock
        with self._lock:
            now = clk.now()
            report = {
                "sampled": 0,
                "batches_built": 0,
                "batches_released": 0,
                "labels_ingested": 0,
                "labels_skipped": 0,
                "leases_expired": 0,
                "scored": 0,
            }
            self._expire_leases(now, report)
            self._release_due_batches(now, report)
            self._poll_backend(clk, now, report)
            for sid in sorted(self.state.submissions):
                submission = self.state.submissions[sid]
                if submission.status == "validated":
                    self._sample_subset(submission)
                    report["sampled"] += 1
                elif submission.status == "sampled":
                    self._build_batches(submission, now)
                    report["batches_built"] += 1
                elif submission.status == "annotating":
                    if self._all_assignments_complete(sid):
                        self._score(submission)
                        report["scored"] += 1
            return report

    def _expire_leases(self, now: datetime, report: dict) -> None:
        for aid in sorted(self.state.assignments):
            a = self.state.assignments[aid]
            if a.status != "leased" or not a.lease_expires_at:
                continue
            if datetime.fromisoformat(a.lease_expires_at) <= now:
                self.store.append("lease_expired", {"assignment_id": aid})
                if self.backend:
                    self.backend.expire(aid)
                    batch = self.state.batches[a.batch_id]
                    if batch.status == "released":
                        item = next(
                            i for i in batch.items if i.assignment_id == aid
                        )
                        self.backend.release(
                            {"batch_id": batch.batch_id, "items": [item.to_payload()]},
                            self.state.task(batch.task_id),
                        )
                report["leases_expired"] += 1

    def _release_due_batches(self, now: datetime, report: dict) -> None:
        for bid in sorted(self.state.batches):
            batch = self.state.batches[bid]
            if batch.status != "pending" or not batch.release_at:
                continue
            if datetime.fromisoformat(batch.release_at) <= now:
                self.store.append(
                    "batch_released",
                    {"batch_id": bid, "release_at": batch.release_at},
                )
                if self.backend:
                    released = self.state.batches[bid]
                    payload = {
                        "batch_id": released.batch_id,
                        "items": [
                            item.to_payload()
                            for item in released.items
                            if self.state.assignments[item.assignment_id].status
                            == "open"
                        ],
                    }
                    self.backend.release(payload, self.state.task(released.task_id))
                report["batches_released"] += 1

    def _poll_backend(self, clk: Clock, now: datetime, report: dict) -> None:
        if not self.backend:
            return
        for completion in self.backend.poll(clk):
            if self._ingest_completion(completion, now):
                report["labels_ingested"] += 1
            else:
                report["labels_skipped"] += 1

    def _ingest_completion(self, completion: LabelSubmission, now: datetime) -> bool:
        a = self.state.assignments.get(completion.assignment_id)
        if a is None or a.status != "open":
            return False
        profile = self.state.annotators.get(completion.annotator_id)
        eligible = profile is not None and qualify(
            profile, self.config.qualification, a.task_id
        ).eligible
        repeat = (a.submission_id, a.instance_id) in self.state.annotator_seen.get(
            completion.annotator_id, set()
        )
        if not eligible or repeat:
            # still open: hand it straight back so the backend rotates workers
            batch = self.state.batches[a.batch_id]
            item = next(i for i in batch.items if i.assignment_id == a.assignment_id)
            self.backend.release(
                {"batch_id": batch.batch_id, "items": [item.to_payload()]},
                self.state.task(batch.task_id),
            )
            return False
        expires = now + timedelta(seconds=self.config.lease_seconds)
        self.store.append(
            "assignment_leased",
            {
                "assignment_id": a.assignment_id,
                "annotator_id": completion.annotator_id,
                "leased_at": now.isoformat(),
                "expires_at": expires.isoformat(),
            },
        )
        records, gold_records = self._make_records(
            a, completion.labels, completion.annotator_id, now
        )
        self.store.append(
            "labels_recorded",
            {
                "assignment_id": a.assignment_id,
                "annotator_id": completion.annotator_id,
                "records": [r.to_dict() for r in records],
                "gold_records": [r.to_dict() for r in gold_records],
            },
        )
        return True

    def _sample_subset(self, submission: Submission) -> None:
        from .planner import sample_eval_subset

        task = self.state.task(submission.task_id)
        test_ids = self.state.test_ids(submission.task_id)
        n = min(task.eval_sample_size, len(test_ids))
        seed = derive_seed(self.config.master_seed, submission.submission_id, "sampling")
        subset = sample_eval_subset(test_ids, n, seed)
        k = self.config.policy.k
        plan = {
            "n_instances": n,
            "labels_per_instance": k,
            "total_cost": round(n * k * task.per_instance_cost, 2),
            "worst_case_se": se_upper_bound(0.5, n * k),
        }
        self.store.append(
            "subset_sampled",
            {
                "submission_id": submission.submission_id,
                "subset_ids": subset,
                "seed": seed,
                "plan": plan,
            },
        )

    def _build_batches(self, submission: Submission, now: datetime) -> None:
        task = self.state.task(submission.task_id)
        seed = derive_seed(
            self.config.master_seed, submission.submission_id, "permutation"
        )
        batches = build_batches(
            submission,
            self.state.subsets[submission.submission_id],
            task,
            self.config.policy.k,
            seed,
            self.state.instances.get(submission.task_id, {}),
            batch_size=self.config.batch_size,
        )
        release_at = next_release_time(self.config.schedule, _FixedClock(now)).isoformat()
        stamped = []
        for batch in batches:
            d = batch.to_dict()
            d["release_at"] = release_at
            stamped.append(d)
        self.store.append(
            "batches_built",
            {
                "submission_id": submission.submission_id,
                "seed": seed,
                "k": self.config.policy.k,
                "batches": stamped,
            },
        )

    def _all_assignments_complete(self, submission_id: str) -> bool:
        batch_ids = self.state.submission_batches.get(submission_id, [])
        if not batch_ids:
            return False
        for bid in batch_ids:
            for item in self.state.batches[bid].items:
                if self.state.assignments[item.assignment_id].status != "complete":
                    return False
        return True

    def _score(self, submission: Submission) -> None:
        task = self.state.task(submission.task_id)
        records = self.state.annotations.get(submission.submission_id, [])
        per_aspect = score_submission(records, task, self.config.policy)
        estimates: dict[str, ScoreEstimate] = {}
        seeds: dict[str, int] = {}
        for aspect, (_, instance_scores) in per_aspect.items():
            seed = derive_seed(
                self.config.master_seed, submission.submission_id, "bootstrap", aspect
            )
            seeds[aspect] = seed
            estimates[aspect] = bootstrap_ci(
                instance_scores,
                level=self.config.ci_level,
                resamples=self.config.resamples,
                seed=seed,
            )
        self.store.append(
            "submission_scored",
            {
                "submission_id": submission.submission_id,
                "scores": {a: e.to_dict() for a, e in estimates.items()},
                "policy": self.config.policy.to_dict(),
                "bootstrap_seeds": seeds,
            },
        )

    def run_until_scored(self, submission_id: str, max_steps: int = 200) -> dict:
        """Drive pipeline steps (advancing a virtual clock over release slots)
        until the submission is scored. Raises on stall."""
        for _ in range(max_steps):
            if self.state.submission(submission_id).status in ("scored", "rejected"):
                return self.get_submission(submission_id)
            self.run_pipeline_step()
            if isinstance(self.clock, VirtualClock):
                pending = [
                    b.release_at
                    for b in self.state.batches.values()
                    if b.status == "pending" and b.release_at
                ]
                if pending:
                    due = min(datetime.fromisoformat(t) for t in pending)
                    if due > self.clock.now():
                        self.clock.set(due)
        raise DomainError(f"submission {submission_id} did not finish in {max_steps} steps")

    # -- interactive annotation (local UI / HTTP) ------------------------------

    def assign_next(self, annotator_id: str, clock: Clock | None = None) -> dict | None:
        """Lease the next open item to the annotator, or None when no work."""
        clk = clock or self.clock
        with self._lock:
            profile = self.state.annotators.get(annotator_id)
            if profile is None:
                raise AuthorizationError(f"unknown annotator: {annotator_id!r}")
            now = clk.now()
            saw_ineligible: list[str] = []
            for bid in sorted(self.state.batches):
                batch = self.state.batches[bid]
                if batch.status != "released":
                    continue
                eligibility = qualify(
                    profile, self.config.qualification, batch.task_id
                )
                if not eligibility.eligible:
                    saw_ineligible.extend(eligibility.reasons)
                    continue
                seen = self.state.annotator_seen.get(annotator_id, set())
                for item in batch.items:
                    a = self.state.assignments[item.assignment_id]
                    if a.status != "open":
                        continue
                    if (a.submission_id, a.instance_id) in seen:
                        continue
                    expires = now + timedelta(seconds=self.config.lease_seconds)
                    self.store.append(
                        "assignment_leased",
                        {
                            "assignment_id": a.assignment_id,
                            "annotator_id": annotator_id,
                            "leased_at": now.isoformat(),
                            "expires_at": expires.isoformat(),
                        },
                    )
                    return self._assignment_payload(item, batch, expires)
            if saw_ineligible:
                raise AuthorizationError(
                    "annotator not qualified: " + ", ".join(sorted(set(saw_ineligible)))
                )
            return None

    def _assignment_payload(self, item, batch, expires: datetime) -> dict:
        task = self.state.task(batch.task_id)
        payload = item.to_payload()  # never contains the presentation key
        payload.update(
            {
                "batch_id": batch.batch_id,
                "lease_expires_at": expires.isoformat(),
                "task": {
                    "task_id": task.task_id,
                    "name": task.name,
                    "instructions": task.instructions,
                    "scheme": task.elicitation.to_dict(),
                    "aspects": [a.to_dict() for a in task.aspects],
                    "paired": task.paired_with_gold,
                },
            }
        )
        return payload

    def record_label(
        self,
        assignment_id: str,
        labels: int | dict,
        annotator_id: str,
        clock: Clock | None = None,
    ) -> list[AnnotationRecord]:
        """Persist the labels for a leased assignment; idempotent on retry."""
        clk = clock or self.clock
        with self._lock:
            a = self.state.assignments.get(assignment_id)
            if a is None:
                raise NotFoundError(f"unknown assignment: {assignment_id!r}")
            if a.status == "complete":
                if a.annotator_id == annotator_id:
                    return [
                        r
                        for r in self.state.annotations.get(a.submission_id, [])
                        if r.instance_id == a.instance_id
                        and r.annotator_id == annotator_id
                    ]
                raise StaleLeaseError("assignment already completed by another annotator")
            now = clk.now()
            if a.status != "leased" or a.annotator_id != annotator_id:
                raise StaleLeaseError("no live lease held by this annotator")
            if a.lease_expires_at and datetime.fromisoformat(a.lease_expires_at) <= now:
                raise StaleLeaseError("lease expired")
            records, gold_records = self._make_records(a, labels, annotator_id, now)
            self.store.append(
                "labels_recorded",
                {
                    "assignment_id": assignment_id,
                    "annotator_id": annotator_id,
                    "records": [r.to_dict() for r in records],
                    "gold_records": [r.to_dict() for r in gold_records],
                },
            )
            return records

    def _make_records(
        self, a, labels: int | dict, annotator_id: str, now: datetime
    ) -> tuple[list[AnnotationRecord], list[AnnotationRecord]]:
        task: TaskSpec = self.state.task(a.task_id)
        scheme = task.elicitation
        paired = a.presentation_key in ("A-gold", "B-gold")
        panels = 2 if paired else 1

        if isinstance(labels, int):
            if len(task.aspect_names) != 1 or paired:
                raise DomainError(
                    "bare integer labels only fit single-aspect unpaired tasks"
                )
            labels = {task.aspect_names[0]: [labels]}
        normalized: dict[str, list[int]] = {}
        for aspect, value in labels.items():
            normalized[aspect] = [value] if isinstance(value, int) else list(value)

        missing = set(task.aspect_names) - normalized.keys()
        if missing:
            raise DomainError(f"missing labels for aspects: {sorted(missing)}")
        extra = normalized.keys() - set(task.aspect_names)
        if extra:
            raise DomainError(f"unknown aspects: {sorted(extra)}")

        day_tag = local_day_tag(now, self.config.schedule)
        elapsed = None
        if a.leased_at:
            elapsed = (now - datetime.fromisoformat(a.leased_at)).total_seconds()

        model_records, gold_records = [], []
        for aspect in task.aspect_names:
            panel_labels = normalized[aspect]
            if len(panel_labels) != panels:
                raise DomainError(
                    f"aspect {aspect!r} needs {panels} label(s), got {len(panel_labels)}"
                )
            for idx in panel_labels:
                scheme.validate_label(idx)
            if paired:
                gold_pos = 0 if a.presentation_key == "A-gold" else 1
                model_label = panel_labels[1 - gold_pos]
                gold_label = panel_labels[gold_pos]
            else:
                model_label = panel_labels[0]
                gold_label = None
            model_records.append(
                AnnotationRecord(
                    submission_id=a.submission_id,
                    instance_id=a.instance_id,
                    aspect=aspect,
                    annotator_id=annotator_id,
                    raw_label=model_label,
                    scheme=scheme.kind,
                    day_tag=day_tag,
                    presentation_key=a.presentation_key,
                    elapsed=elapsed,
                )
            )
            if gold_label is not None:
                gold_records.append(
                    AnnotationRecord(
                        submission_id=a.submission_id,
                        instance_id=a.instance_id,
                        aspect=aspect,
                        annotator_id=annotator_id,
                        raw_label=gold_label,
                        scheme=scheme.kind,
                        day_tag=day_tag,
                        presentation_key=a.presentation_key,
                        elapsed=elapsed,
                    )
                )
        return model_records, gold_records

    # -- queries ------------------------------------------------------------

    def get_submission(self, submission_id: str) -> dict:
        """Full submission record: status, plan, scores, metrics, seeds."""
        state = self.state
        sub = state.submission(submission_id)
        seeds = dict(state.seeds.get(submission_id, {}))
        task = state.tasks.get(sub.task_id)
        if (
            task is not None
            and task.paired_with_gold
            and sub.status != "scored"
            and "permutation" in seeds
        ):
            # withhold while annotation is blind and in flight
            seeds["permutation"] = None
        batches = [
            state.batches[bid]
            for bid in state.submission_batches.get(submission_id, [])
        ]
        return {
            "submission_id": sub.submission_id,
            "task_id": sub.task_id,
            "submitter": sub.submitter,
            "created_at": sub.created_at,
            "status": sub.status,
            "violations": state.violations.get(submission_id, []),
            "plan": state.plans.get(submission_id),
            "subset_size": len(state.subsets.get(submission_id, [])),
            "seeds": seeds,
            "policy": state.policies.get(submission_id),
            "human": {
                aspect: {**est.to_dict(), "display": est.display()}
                for aspect, est in state.human_scores.get(submission_id, {}).items()
            },
            "metrics": {
                name: r.to_dict()
                for name, r in state.metrics.get(submission_id, {}).items()
            },
            "metric_failures": state.metric_failures.get(submission_id, {}),
            "window": state.annotation_window(submission_id),
            "batches": {
                "total": len(batches),
                "pending": sum(1 for b in batches if b.status == "pending"),
                "released": sum(1 for b in batches if b.status == "released"),
                "complete": sum(1 for b in batches if b.status == "complete"),
            },
        }

    def get_leaderboard(self, task_id: str, sort_aspect: str | None = None) -> dict:
        scored, pending = self.state.leaderboard(task_id, sort_aspect)
        task = self.state.task(task_id)
        return {
            "task_id": task_id,
            "sort_aspect": sort_aspect or task.aspect_names[0],
            "entries": [e.to_dict() for e in scored],
            "unscored": [e.to_dict() for e in pending],
        }

    # -- fixtures ----------------------------------------------------------

    def load_fixture_entries(self, source: dict | str | Path) -> int:
        """Seed scored demo entries (human means on the x100 display scale)."""
        import json

        if not isinstance(source, dict):
            source = json.loads(Path(source).read_text(encoding="utf-8"))
        count = 0
        base = datetime(2021, 1, 4, 18, 0, 0).isoformat()
        for block in source["fixtures"]:
            task = self.state.task(block["task_id"])
            for i, entry in enumerate(block["entries"]):
                sid = f"fixture-{task.task_id}-{i:02d}"
                if sid in self.state.submissions:
                    continue
                human = {}
                for aspect, values in entry["human"].items():
                    if aspect not in task.aspect_names:
                        raise DomainError(
                            f"fixture aspect {aspect!r} unknown for {task.task_id}"
                        )
                    mean = values["mean"] / 100.0
                    n = values.get("n", task.eval_sample_size)
                    human[aspect] = ScoreEstimate(
                        mean=mean,
                        n=n,
                        ci_low=mean - values.get("minus", 0.0) / 100.0,
                        ci_high=mean + values.get("plus", 0.0) / 100.0,
                        method="percentile_bootstrap",
                    ).to_dict()
                metrics = {
                    name: {
                        "metric_name": name,
                        "corpus_score": value,
                        "per_instance_scores": [],
                        "config_fingerprint": "fixture",
                        "details": {},
                    }
                    for name, value in entry.get("metrics", {}).items()
                }
                with self._lock:
                    self.store.append(
                        "fixture_entry_loaded",
                        {
                            "submission_id": sid,
                            "task_id": task.task_id,
                            "submitter": entry["system"],
                            "created_at": f"{base[:17]}{i:02d}+00:00",
                            "human": human,
                            "metrics": metrics,
                        },
                    )
                count += 1
        return count


class _FixedClock:
    def __init__(self, moment: datetime):
        self._moment = moment

    def now(self) -> datetime:
        return self._moment
