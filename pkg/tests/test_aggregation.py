import itertools

import pytest
from hypothesis import given, strategies as st

from crowdboard.aggregation import (
    AggregationPolicy,
    aggregate_instance,
    binarize_likert,
    binary_to_score,
    label_to_score,
    likert_to_score,
    score_submission,
)
from crowdboard.errors import DomainError, InconsistencyError
from crowdboard.model import AnnotationRecord, AspectSpec, ElicitationScheme, TaskSpec

TASK = TaskSpec(
    task_id="t",
    name="t",
    elicitation=ElicitationScheme("likert5"),
    aspects=(AspectSpec("quality"),),
    eval_sample_size=360,
    per_instance_cost=0.1,
)


def rec(instance, label, scheme="likert5", aspect="quality", annotator="w0"):
    return AnnotationRecord(
        submission_id="s",
        instance_id=instance,
        aspect=aspect,
        annotator_id=annotator,
        raw_label=label,
        scheme=scheme,
        day_tag="2021-03-01",
    )


class TestLikertMapping:
    def test_exact_values(self):
        assert [likert_to_score(i) for i in range(5)] == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_strictly_monotone(self):
        scores = [likert_to_score(i) for i in range(5)]
        assert all(a < b for a, b in zip(scores, scores[1:]))

    @pytest.mark.parametrize("bad", [-1, 5, 17])
    def test_out_of_range(self, bad):
        with pytest.raises(DomainError):
            likert_to_score(bad)


class TestBinarize:
    def test_positive_side(self):
        assert binarize_likert(3) == 1  # agree
        assert binarize_likert(4) == 1  # strongly-agree

    def test_neutral_is_pessimistic(self):
        assert binarize_likert(2) == 0

    def test_negative_side(self):
        assert binarize_likert(0) == 0
        assert binarize_likert(1) == 0

    def test_monotone_under_promotion_all_multisets(self):
        # promoting any label one step never decreases the aggregate, for
        # every label tuple up to length 5 and both combiners
        for size in range(1, 6):
            for labels in itertools.product(range(5), repeat=size):
                for combine in ("mean", "majority_vote"):
                    base = aggregate_instance(
                        [label_to_score(c, "likert5", combine) for c in labels], combine
                    )
                    for pos in range(size):
                        if labels[pos] == 4:
                            continue
                        promoted = list(labels)
                        promoted[pos] += 1
                        bumped = aggregate_instance(
                            [label_to_score(c, "likert5", combine) for c in promoted],
                            combine,
                        )
                        assert bumped >= base


class TestBinaryToScore:
    def test_values(self):
        assert binary_to_score(1) == 1.0
        assert binary_to_score(0) == 0.0

    def test_invalid(self):
        with pytest.raises(DomainError):
            binary_to_score(2)


class TestAggregateInstance:
    def test_mean(self):
        assert aggregate_instance([1.0, 0.75, 0.5]) == pytest.approx(0.75)

    def test_majority(self):
        assert aggregate_instance([1, 1, 0], "majority_vote") == 1.0
        assert aggregate_instance([0, 0, 1], "majority_vote") == 0.0

    def test_tie_rule(self):
        assert aggregate_instance([1, 0], "majority_vote") == 0.5

    def test_tie_unreachable_with_three_labels(self):
        for labels in itertools.product((0, 1), repeat=3):
            assert aggregate_instance(list(labels), "majority_vote") in (0.0, 1.0)

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            aggregate_instance([])

    def test_majority_requires_binary_inputs(self):
        with pytest.raises(DomainError):
            aggregate_instance([0.75, 0.5], "majority_vote")

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=20))
    def test_mean_in_unit_interval_and_permutation_invariant(self, scores):
        value = aggregate_instance(scores)
        assert 0.0 <= value <= 1.0
        assert aggregate_instance(list(reversed(scores))) == pytest.approx(value)


class TestScoreSubmission:
    def test_three_instance_unilabeling_mean(self):
        records = [rec("i1", 3), rec("i2", 2), rec("i3", 4)]
        result = score_submission(records, TASK)
        estimate, scores = result["quality"]
        assert estimate == pytest.approx(0.75)
        assert sorted(scores) == [0.5, 0.75, 1.0]

    def test_all_strongly_disagree(self):
        records = [rec(f"i{j}", 0) for j in range(5)]
        estimate, _ = score_submission(records, TASK)["quality"]
        assert estimate == 0.0

    def test_multilabeling_mean_equals_flat_mean_at_scale(self):
        # 360 instances x 3 labels; equal label counts make the nested mean
        # collapse to the flat mean of all 1,080 mapped scores
        import numpy as np

        rng = np.random.default_rng(42)
        labels = rng.integers(0, 5, size=(360, 3))
        records = [
            rec(f"i{i:04d}", int(labels[i, j]), annotator=f"w{j}")
            for i in range(360)
            for j in range(3)
        ]
        policy = AggregationPolicy(labeling="multilabeling", k=3)
        estimate, scores = score_submission(records, TASK, policy)["quality"]
        flat = sum(likert_to_score(int(c)) for c in labels.flat) / labels.size
        assert len(scores) == 360
        assert estimate == pytest.approx(flat, abs=1e-12)

    def test_unilabeling_rejects_multiple_labels(self):
        records = [rec("i1", 3), rec("i1", 2, annotator="w1")]
        with pytest.raises(InconsistencyError):
            score_submission(records, TASK)

    def test_mixed_schemes_rejected(self):
        records = [rec("i1", 3), rec("i2", 1, scheme="binary")]
        with pytest.raises(InconsistencyError):
            score_submission(records, TASK)

    def test_records_must_share_submission(self):
        a = rec("i1", 3)
        b = AnnotationRecord(
            submission_id="other",
            instance_id="i2",
            aspect="quality",
            annotator_id="w",
            raw_label=1,
            scheme="likert5",
            day_tag="2021-03-01",
        )
        with pytest.raises(InconsistencyError):
            score_submission([a, b], TASK)

    def test_instances_without_annotations_excluded(self):
        records = [rec("i1", 4)]
        estimate, scores = score_submission(records, TASK)["quality"]
        assert estimate == 1.0 and len(scores) == 1

    def test_aggregates_bounded(self):
        records = [rec(f"i{j}", j % 5) for j in range(25)]
        estimate, scores = score_submission(records, TASK)["quality"]
        assert 0.0 <= estimate <= 1.0
        assert all(0.0 <= s <= 1.0 for s in scores)


class TestPolicy:
    def test_multilabeling_needs_k_at_least_two(self):
        with pytest.raises(DomainError):
            AggregationPolicy(labeling="multilabeling", k=1)

    def test_unilabeling_pins_k(self):
        with pytest.raises(DomainError):
            AggregationPolicy(labeling="unilabeling", k=3)
