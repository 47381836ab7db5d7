"""Simulated annotation backend: a pool of noisy crowdworkers.

Implements the same backend contract as a real crowdsourcing connector —
release(batch), poll(clock), expire(assignment) — so the full pipeline runs
with zero network access. The pool only ever sees blinded item payloads
(no presentation keys); it rates every candidate panel on its own merits
using a reference-overlap heuristic as the latent "true" quality.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Protocol

from .clock import Clock
from .metrics import tokenize
from .model import AnnotatorProfile, Instance, TaskSpec
from .rng import derive_seed, make_generator
from .simulate import AnnotatorModel


@dataclass(frozen=True)
class LabelSubmission:
    """One completed assignment coming back from a backend.

    ``labels`` maps aspect -> list of category indices, aligned with the
    item's candidate panels (1 entry for unpaired tasks, 2 for paired).
    """

    assignment_id: str
    annotator_id: str
    labels: dict

    def to_dict(self) -> dict:
        return {
            "assignment_id": self.assignment_id,
            "annotator_id": self.annotator_id,
            "labels": self.labels,
        }


class AnnotationBackend(Protocol):
    """Contract between the dispatcher and any annotation workforce."""

    def release(self, batch_payload: dict, task: TaskSpec) -> None:
        ...

    def poll(self, clock: Clock) -> list[LabelSubmission]:
        ...

    def expire(self, assignment_id: str) -> None:
        ...


def reference_overlap_quality(instance: Instance, candidate: str) -> float:
    """Unigram-F1 of the candidate against the instance references.

    Stands in for an annotator's latent judgment: the gold text scores 1.0,
    degraded outputs score lower.
    """
    cand = Counter(tokenize(candidate.lower()))
    if not instance.references or not cand:
        return 0.0
    best = 0.0
    for ref in instance.references:
        ref_counts = Counter(tokenize(ref.lower()))
        if not ref_counts:
            continue
        overlap = sum((cand & ref_counts).values())
        if overlap == 0:
            continue
        p = overlap / sum(cand.values())
        r = overlap / sum(ref_counts.values())
        best = max(best, 2 * p * r / (p + r))
    return best


def make_pool_profiles(
    n: int, task_ids: list[str], seed: int
) -> list[tuple[AnnotatorProfile, AnnotatorModel]]:
    """A roster of qualified simulated workers with seeded trait draws."""
    rng = make_generator(seed)
    roster = []
    for i in range(n):
        annotator_id = f"worker-{i:03d}"
        profile = AnnotatorProfile(
            annotator_id=annotator_id,
            locale="US",
            hits_completed=5000 + int(rng.integers(0, 20000)),
            approval_rate=0.99 + float(rng.uniform(0.0, 0.01)),
            passed_qual_tests=frozenset(task_ids),
        )
        model = AnnotatorModel(
            annotator_id=annotator_id,
            bias=float(rng.normal(0.0, 0.04)),
            noise_sd=0.08,
        )
        roster.append((profile, model))
    return roster


@dataclass
class _OpenItem:
    assignment_id: str
    instance_id: str
    candidates: list[str]
    task_id: str
    scheme: str
    aspects: tuple[str, ...]


@dataclass
class SimulatedPool:
    """Deterministic simulated workforce; labels appear on the next poll."""

    roster: list[tuple[AnnotatorProfile, AnnotatorModel]]
    instances: dict[str, dict[str, Instance]]  # task_id -> instance_id -> Instance
    seed: int = 0
    items_per_poll: int | None = None  # None = finish everything released
    _open: dict[str, _OpenItem] = field(default_factory=dict)
    _release_order: list[str] = field(default_factory=list)
    _per_instance_served: dict[tuple[str, str], int] = field(default_factory=dict)

    @property
    def profiles(self) -> list[AnnotatorProfile]:
        return [profile for profile, _ in self.roster]

    def release(self, batch_payload: dict, task: TaskSpec) -> None:
        for item in batch_payload["items"]:
            aid = item["assignment_id"]
            if aid in self._open:
                continue
            self._open[aid] = _OpenItem(
                assignment_id=aid,
                instance_id=item["instance_id"],
                candidates=list(item["candidates"]),
                task_id=task.task_id,
                scheme=task.elicitation.kind,
                aspects=task.aspect_names,
            )
            self._release_order.append(aid)

    def expire(self, assignment_id: str) -> None:
        # a fresh lease will come back via release; nothing to undo here
        self._open.pop(assignment_id, None)

    def poll(self, clock: Clock) -> list[LabelSubmission]:
        del clock  # simulated workers finish instantly
        budget = self.items_per_poll or len(self._release_order)
        done: list[LabelSubmission] = []
        remaining: list[str] = []
        for aid in self._release_order:
            item = self._open.get(aid)
            if item is None:
                continue
            if len(done) >= budget:
                remaining.append(aid)
                continue
            done.append(self._annotate(item))
            del self._open[aid]
        self._release_order = remaining
        return done

    def _annotate(self, item: _OpenItem) -> LabelSubmission:
        # rotate workers so an instance's k copies hit k distinct annotators
        key = (item.task_id, item.instance_id)
        served = self._per_instance_served.get(key, 0)
        self._per_instance_served[key] = served + 1
        base = derive_seed(self.seed, "who", item.task_id, item.instance_id)
        profile, model = self.roster[(base + served) % len(self.roster)]

        instance = self.instances[item.task_id][item.instance_id]
        rng = make_generator(derive_seed(self.seed, "labels", item.assignment_id))
        labels: dict[str, list[int]] = {}
        for aspect in item.aspects:
            panel_labels = []
            for candidate in item.candidates:
                quality = reference_overlap_quality(instance, candidate)
                panel_labels.append(model.label(quality, item.scheme, rng))
            labels[aspect] = panel_labels
        return LabelSubmission(
            assignment_id=item.assignment_id,
            annotator_id=profile.annotator_id,
            labels=labels,
        )
