"""Label-to-score mapping and per-instance/per-submission aggregation.

Scores live in [0, 1]. Likert categories map to equally spaced values
(index * 0.25); binary maps no/yes to 0/1. Instance labels combine by mean
or by majority vote over binarized labels.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, InconsistencyError
from .model import AnnotationRecord, TaskSpec

LIKERT_STEP = 0.25

# Likert categories at or above "agree" binarize to 1; neutral pessimistically
# counts as 0 so binarization never inflates scores.
BINARIZE_THRESHOLD = 3


@dataclass(frozen=True)
class AggregationPolicy:
    """How raw labels become a submission score."""

    elicitation: str = "likert5"  # "likert5" | "binary"
    combine: str = "mean"  # "mean" | "majority_vote"
    labeling: str = "unilabeling"  # "unilabeling" | "multilabeling"
    k: int = 1  # labels per instance (multilabeling only)

    def __post_init__(self):
        if self.elicitation not in ("likert5", "binary"):
            raise DomainError(f"unknown elicitation: {self.elicitation!r}")
        if self.combine not in ("mean", "majority_vote"):
            raise DomainError(f"unknown combine: {self.combine!r}")
        if self.labeling not in ("unilabeling", "multilabeling"):
            raise DomainError(f"unknown labeling: {self.labeling!r}")
        if self.labeling == "multilabeling" and self.k < 2:
            raise DomainError("multilabeling requires k >= 2")
        if self.labeling == "unilabeling" and self.k != 1:
            raise DomainError("unilabeling implies k = 1")

    def to_dict(self) -> dict:
        return {
            "elicitation": self.elicitation,
            "combine": self.combine,
            "labeling": self.labeling,
            "k": self.k,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AggregationPolicy:
        return cls(
            elicitation=d.get("elicitation", "likert5"),
            combine=d.get("combine", "mean"),
            labeling=d.get("labeling", "unilabeling"),
            k=d.get("k", 1),
        )


DEFAULT_POLICY = AggregationPolicy()  # unilabeling + likert5 + mean


def likert_to_score(category: int) -> float:
    """Map a Likert index (0=strongly-disagree .. 4=strongly-agree) to [0, 1]."""
    if not isinstance(category, int) or isinstance(category, bool):
        raise DomainError(f"category must be an integer, got {category!r}")
    if not 0 <= category <= 4:
        raise DomainError(f"likert category {category} out of range 0..4")
    return category * LIKERT_STEP


def binarize_likert(category: int) -> int:
    """Collapse a Likert index to 0/1: agree and strongly-agree count as 1."""
    if not isinstance(category, int) or isinstance(category, bool):
        raise DomainError(f"category must be an integer, got {category!r}")
    if not 0 <= category <= 4:
        raise DomainError(f"likert category {category} out of range 0..4")
    return 1 if category >= BINARIZE_THRESHOLD else 0


def binary_to_score(category: int) -> float:
    """Map a binary index (0=no, 1=yes) to 0.0/1.0."""
    if category not in (0, 1) or isinstance(category, bool):
        raise DomainError(f"binary category must be 0 or 1, got {category!r}")
    return float(category)


def aggregate_instance(scores: list[float], combine: str = "mean") -> float:
    """Combine one instance's per-label scores into a single instance score.

    mean: arithmetic mean. majority_vote: expects binarized (0/1) inputs and
    returns 1.0 on a strict majority of 1s, 0.0 on a strict majority of 0s,
    and 0.5 on an exact tie (unreachable for odd label counts).
    """
    if not scores:
        raise DomainError("cannot aggregate an empty score list")
    if combine == "mean":
        return sum(scores) / len(scores)
    if combine == "majority_vote":
        if any(s not in (0, 1, 0.0, 1.0) for s in scores):
            raise DomainError("majority_vote requires binarized (0/1) inputs")
        ones = sum(1 for s in scores if s == 1)
        zeros = len(scores) - ones
        if ones > zeros:
            return 1.0
        if zeros > ones:
            return 0.0
        return 0.5
    raise DomainError(f"unknown combine: {combine!r}")


def label_to_score(raw_label: int, scheme: str, combine: str) -> float:
    """Map one raw label to the score the configured combiner consumes."""
    if combine == "majority_vote":
        if scheme == "likert5":
            return float(binarize_likert(raw_label))
        return binary_to_score(raw_label)
    if scheme == "likert5":
        return likert_to_score(raw_label)
    return binary_to_score(raw_label)


def score_submission(
    records: list[AnnotationRecord],
    task: TaskSpec,
    policy: AggregationPolicy = DEFAULT_POLICY,
) -> dict[str, tuple[float, list[float]]]:
    """Aggregate one submission's annotation records per aspect.

    Returns {aspect: (point_estimate, per_instance_scores)}. Instance scores
    are aggregated per the policy's combiner, then averaged over instances;
    the per-instance list is kept for bootstrapping. Instances with zero
    annotations simply do not appear (they are excluded, not imputed).
    """
    if not records:
        raise DomainError("no annotation records to score")
    submission_ids = {r.submission_id for r in records}
    if len(submission_ids) != 1:
        raise InconsistencyError(
            f"records span multiple submissions: {sorted(submission_ids)}"
        )

    by_aspect: dict[str, dict[str, list[AnnotationRecord]]] = {}
    for rec in records:
        by_aspect.setdefault(rec.aspect, {}).setdefault(rec.instance_id, []).append(rec)

    result: dict[str, tuple[float, list[float]]] = {}
    for aspect in task.aspect_names:
        per_instance = by_aspect.get(aspect)
        if not per_instance:
            continue
        schemes = {r.scheme for recs in per_instance.values() for r in recs}
        if len(schemes) != 1:
            raise InconsistencyError(
                f"aspect {aspect!r} mixes schemes: {sorted(schemes)}"
            )
        (scheme,) = schemes
        if policy.labeling == "unilabeling":
            bad = [iid for iid, recs in per_instance.items() if len(recs) != 1]
            if bad:
                raise InconsistencyError(
                    f"unilabeling expects exactly 1 record per instance; "
                    f"violated for {sorted(bad)[:5]}"
                )
        instance_scores = [
            aggregate_instance(
                [label_to_score(r.raw_label, scheme, policy.combine) for r in recs],
                policy.combine,
            )
            for _, recs in sorted(per_instance.items())
        ]
        estimate = sum(instance_scores) / len(instance_scores)
        result[aspect] = (estimate, instance_scores)
    return result
