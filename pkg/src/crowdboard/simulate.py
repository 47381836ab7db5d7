"""Annotation-policy reproducibility study on a simulated annotator pool.

Simulates a pool of biased, noisy annotators labeling instances with latent
quality scores, then compares labeling policies under a fixed budget:

  unilabeling   - 1 label each for the full instance set
  multilabeling - k labels each for 1/k of the instances

Both policies resample with replacement over many rounds; the spread of the
resulting round scores measures how reproducible each design is. The analytic
counterpart is ``closed_form_variance``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .aggregation import label_to_score
from .errors import ConfigError, DomainError
from .model import AnnotationRecord
from .rng import derive_seed, make_generator

# Reference mean from an expert pass over the QA demo task; drawn as a
# comparison line in reports, never used in any computation.
EXPERT_REFERENCE_SCORE = 0.803

SCHEMES = ("likert5", "binary")
COMBINES = ("mean", "majority_vote")
POLICIES = ("unilabeling", "multilabeling")


def nearest_category(latent: float, scheme_kind: str) -> int:
    """Map a latent [0, 1] value to the nearest category index (half rounds up)."""
    x = min(1.0, max(0.0, latent))
    if scheme_kind == "likert5":
        return min(4, int(x * 4 + 0.5))
    if scheme_kind == "binary":
        return 1 if x >= 0.5 else 0
    raise DomainError(f"unknown scheme: {scheme_kind!r}")


@dataclass(frozen=True)
class AnnotatorModel:
    """A simulated annotator: additive bias plus Gaussian latent noise."""

    annotator_id: str
    bias: float = 0.0
    noise_sd: float = 0.05
    discretizer: Callable[[float, str], int] = nearest_category

    def __post_init__(self):
        if self.noise_sd < 0:
            raise DomainError("noise_sd must be >= 0")

    def label(self, true_score: float, scheme_kind: str, rng: np.random.Generator) -> int:
        latent = true_score + self.bias + rng.normal(0.0, self.noise_sd)
        return self.discretizer(latent, scheme_kind)


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one reproducibility-study run."""

    n_instances: int = 360
    k: int = 3
    rounds: int = 500
    scheme: str | None = None  # None sweeps both schemes
    combine: str | None = None  # None sweeps both combiners
    days: tuple[str, ...] = ("day-1", "day-2", "day-3")
    seed: int = 0
    n_annotators: int = 9
    annotator_bias_sd: float = 0.05
    noise_sd: float = 0.10
    day_drift: float = 0.0  # per-day offset on latent quality; 0 = stationary
    truth_beta: tuple[float, float] = (4.0, 2.0)

    def __post_init__(self):
        if self.rounds < 1:
            raise DomainError("rounds must be >= 1")
        if self.k < 1:
            raise DomainError("k must be >= 1")
        if self.n_instances < 1:
            raise DomainError("n_instances must be >= 1")
        if self.scheme is not None and self.scheme not in SCHEMES:
            raise DomainError(f"unknown scheme: {self.scheme!r}")
        if self.combine is not None and self.combine not in COMBINES:
            raise DomainError(f"unknown combine: {self.combine!r}")
        if isinstance(self.days, list):
            object.__setattr__(self, "days", tuple(self.days))

    def to_dict(self) -> dict:
        d = {
            "n_instances": self.n_instances,
            "k": self.k,
            "rounds": self.rounds,
            "scheme": self.scheme,
            "combine": self.combine,
            "days": list(self.days),
            "seed": self.seed,
            "n_annotators": self.n_annotators,
            "annotator_bias_sd": self.annotator_bias_sd,
            "noise_sd": self.noise_sd,
            "day_drift": self.day_drift,
            "truth_beta": list(self.truth_beta),
        }
        return d


@dataclass(frozen=True)
class CellStats:
    """Round-score statistics for one (scheme, combine, policy, day) cell."""

    scheme: str
    combine: str
    policy: str
    day: str
    mean: float
    sd: float
    min: float
    max: float
    rounds: int

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "combine": self.combine,
            "policy": self.policy,
            "day": self.day,
            "mean": self.mean,
            "sd": self.sd,
            "min": self.min,
            "max": self.max,
            "rounds": self.rounds,
        }


@dataclass(frozen=True)
class VarianceReport:
    """All cell statistics plus the per-policy variance aggregation."""

    config: SimConfig
    cells: tuple[CellStats, ...]
    aggregated_variance: dict = field(default_factory=dict)  # policy -> mean var

    def cell(self, scheme: str, combine: str, policy: str, day: str) -> CellStats:
        for c in self.cells:
            if (c.scheme, c.combine, c.policy, c.day) == (scheme, combine, policy, day):
                return c
        raise KeyError((scheme, combine, policy, day))

    def table_rows(self) -> list[dict]:
        """Plot-ready rows: configuration, day, mean, sd."""
        return [
            {
                "configuration": f"{c.scheme}/{c.combine}/{c.policy}",
                "day": c.day,
                "mean": c.mean,
                "sd": c.sd,
            }
            for c in self.cells
        ]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "cells": [c.to_dict() for c in self.cells],
            "aggregated_variance": dict(self.aggregated_variance),
            "expert_reference": EXPERT_REFERENCE_SCORE,
        }


def make_annotator_roster(
    n_annotators: int, bias_sd: float, noise_sd: float, seed: int
) -> list[AnnotatorModel]:
    rng = make_generator(seed)
    return [
        AnnotatorModel(
            annotator_id=f"sim-{i:03d}",
            bias=float(rng.normal(0.0, bias_sd)),
            noise_sd=noise_sd,
        )
        for i in range(n_annotators)
    ]


def simulate_annotation_pool(
    true_scores: Sequence[float],
    annotators: Sequence[AnnotatorModel],
    k: int,
    scheme: str,
    seed: int,
    submission_id: str = "sim",
    aspect: str = "quality",
    day_tag: str = "day-1",
) -> list[AnnotationRecord]:
    """Give every instance k labels from k distinct annotators.

    Annotators rotate round-robin: instance i is labeled by annotators
    (i + j) mod A for j in 0..k-1, so the pool load is balanced and no
    instance sees the same annotator twice.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    if not annotators:
        raise ConfigError("annotator roster is empty")
    if len(annotators) < k:
        raise ConfigError(
            f"need at least k={k} distinct annotators, have {len(annotators)}"
        )
    if scheme not in SCHEMES:
        raise DomainError(f"unknown scheme: {scheme!r}")
    rng = make_generator(seed)
    records: list[AnnotationRecord] = []
    n_annotators = len(annotators)
    for i, true_score in enumerate(true_scores):
        for j in range(k):
            annotator = annotators[(i + j) % n_annotators]
            raw = annotator.label(float(true_score), scheme, rng)
            records.append(
                AnnotationRecord(
                    submission_id=submission_id,
                    instance_id=f"inst-{i:05d}",
                    aspect=aspect,
                    annotator_id=annotator.annotator_id,
                    raw_label=raw,
                    scheme=scheme,
                    day_tag=day_tag,
                )
            )
    return records


def _label_matrix(
    records: Sequence[AnnotationRecord] | dict | np.ndarray, combine: str
) -> np.ndarray:
    """Arrange input labels as an (n_instances, k) score matrix."""
    if isinstance(records, np.ndarray):
        matrix = np.asarray(records, dtype=np.float64)
        if matrix.ndim != 2:
            raise DomainError("label matrix must be 2-dimensional (instances x k)")
        return matrix
    if isinstance(records, dict):
        grouped = records
    else:
        grouped = {}
        for rec in records:
            grouped.setdefault(rec.instance_id, []).append(rec)
    counts = {len(recs) for recs in grouped.values()}
    if len(counts) != 1:
        raise DomainError(f"instances have unequal label counts: {sorted(counts)}")
    rows = []
    for _, recs in sorted(grouped.items()):
        rows.append([label_to_score(r.raw_label, r.scheme, combine) for r in recs])
    return np.asarray(rows, dtype=np.float64)


def _instance_aggregate(matrix: np.ndarray, combine: str) -> np.ndarray:
    if combine == "mean":
        return matrix.mean(axis=1)
    if combine == "majority_vote":
        k = matrix.shape[1]
        ones = matrix.sum(axis=1)
        return np.where(ones * 2 > k, 1.0, np.where(ones * 2 < k, 0.0, 0.5))
    raise DomainError(f"unknown combine: {combine!r}")


def resample_policy_scores(
    records: Sequence[AnnotationRecord] | dict | np.ndarray,
    policy: str,
    rounds: int,
    seed: int,
    combine: str = "mean",
) -> np.ndarray:
    """Submission-level scores over ``rounds`` budget-matched resamples.

    multilabeling: each round draws n/k instances with replacement and keeps
    all k of their labels. unilabeling: each round draws n instances with
    replacement and keeps 1 of the k labels per draw. Either way a round
    spends n labels; instance values aggregate per ``combine`` and the round
    score is their mean.

    ``records`` may be AnnotationRecords (flat or grouped by instance) or a
    pre-mapped (n_instances, k) score matrix.
    """
    if policy not in POLICIES:
        raise DomainError(f"unknown policy: {policy!r}")
    if rounds < 1:
        raise DomainError("rounds must be >= 1")
    matrix = _label_matrix(records, combine)
    n, k = matrix.shape
    if policy == "multilabeling" and k == 1:
        raise ConfigError("multilabeling requires k >= 2 labels per instance")

    rng = make_generator(seed)
    if policy == "multilabeling":
        x = n // k
        if x < 1:
            raise DomainError(f"n={n} too small for multilabeling with k={k}")
        instance_values = _instance_aggregate(matrix, combine)
        idx = rng.integers(0, n, size=(rounds, x))
        return instance_values[idx].mean(axis=1)

    idx = rng.integers(0, n, size=(rounds, n))
    col = rng.integers(0, k, size=(rounds, n))
    return matrix[idx, col].mean(axis=1)


def closed_form_variance(
    sigma_b2: float, sigma_w2: float, x: int, k: int
) -> tuple[float, float]:
    """Analytic round-score variance for both policies at equal budget.

    Budget: multilabeling spends k labels on each of x instances; unilabeling
    spends 1 label on each of k*x instances. Returns (var_multi, var_uni).
    """
    if sigma_b2 < 0 or sigma_w2 < 0:
        raise DomainError("variance components must be >= 0")
    if x < 1:
        raise DomainError("x must be >= 1")
    if k < 1:
        raise DomainError("k must be >= 1")
    var_multi = sigma_b2 / x + sigma_w2 / (k * x)
    var_uni = (sigma_b2 + sigma_w2) / (k * x)
    return var_multi, var_uni


def run_case_study(config: SimConfig) -> VarianceReport:
    """Sweep scheme x combine x policy x day and report round-score spread.

    Instance truths are drawn once; each day is an independent seed stream
    re-labeling the same instances (plus ``day_drift`` per day index if
    configured). Deterministic given the config.
    """
    schemes = (config.scheme,) if config.scheme else SCHEMES
    combines = (config.combine,) if config.combine else COMBINES

    truth_rng = make_generator(derive_seed(config.seed, "truths"))
    truths = truth_rng.beta(*config.truth_beta, size=config.n_instances)
    roster = make_annotator_roster(
        config.n_annotators,
        config.annotator_bias_sd,
        config.noise_sd,
        derive_seed(config.seed, "annotators"),
    )

    cells: list[CellStats] = []
    for day_index, day in enumerate(config.days):
        day_truths = truths + config.day_drift * day_index
        for scheme in schemes:
            records = simulate_annotation_pool(
                day_truths,
                roster,
                config.k,
                scheme,
                derive_seed(config.seed, "pool", day, scheme),
                day_tag=day,
            )
            for combine in combines:
                for policy in POLICIES:
                    scores = resample_policy_scores(
                        records,
                        policy,
                        config.rounds,
                        derive_seed(config.seed, "resample", day, scheme, combine, policy),
                        combine=combine,
                    )
                    cells.append(
                        CellStats(
                            scheme=scheme,
                            combine=combine,
                            policy=policy,
                            day=day,
                            mean=float(scores.mean()),
                            sd=float(scores.std(ddof=1)) if len(scores) > 1 else 0.0,
                            min=float(scores.min()),
                            max=float(scores.max()),
                            rounds=config.rounds,
                        )
                    )

    aggregated = {
        policy: float(
            np.mean([c.sd**2 for c in cells if c.policy == policy])
        )
        for policy in POLICIES
    }
    return VarianceReport(config=config, cells=tuple(cells), aggregated_variance=aggregated)


def render_report_text(report: VarianceReport) -> str:
    """Human-readable table of the report cells."""
    lines = [
        f"{'configuration':<34} {'day':<8} {'mean':>8} {'sd':>8} {'min':>8} {'max':>8}",
        "-" * 78,
    ]
    for c in report.cells:
        conf = f"{c.scheme}/{c.combine}/{c.policy}"
        lines.append(
            f"{conf:<34} {c.day:<8} {c.mean:>8.4f} {c.sd:>8.4f} {c.min:>8.4f} {c.max:>8.4f}"
        )
    lines.append("-" * 78)
    for policy, var in report.aggregated_variance.items():
        lines.append(f"aggregated variance [{policy}]: {var:.6g}")
    lines.append(f"expert reference score: {EXPERT_REFERENCE_SCORE}")
    return "\n".join(lines)
