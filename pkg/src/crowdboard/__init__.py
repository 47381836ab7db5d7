"""crowdboard: human-in-the-loop evaluation leaderboard for text generation."""

__version__ = "0.1.0"

from .aggregation import (
    AggregationPolicy,
    aggregate_instance,
    binarize_likert,
    binary_to_score,
    likert_to_score,
    score_submission,
)
from .model import (
    AnnotationRecord,
    AnnotatorProfile,
    AspectSpec,
    ElicitationScheme,
    Instance,
    Submission,
    TaskSpec,
)
from .planner import BudgetPlan, plan_budget, sample_eval_subset
from .simulate import (
    AnnotatorModel,
    SimConfig,
    VarianceReport,
    closed_form_variance,
    resample_policy_scores,
    run_case_study,
    simulate_annotation_pool,
)
from .taskconfig import load_default_task_specs, load_instances, load_task_specs
from .uncertainty import (
    ScoreEstimate,
    SEBound,
    bhatia_davis_sigma_max,
    bootstrap_ci,
    normal_ci_halfwidth,
    se_upper_bound,
    standard_error,
)
from .validation import parse_prediction_file, validate_submission

__all__ = [
    "AggregationPolicy",
    "AnnotationRecord",
    "AnnotatorModel",
    "AnnotatorProfile",
    "AspectSpec",
    "BudgetPlan",
    "ElicitationScheme",
    "Instance",
    "ScoreEstimate",
    "SEBound",
    "SimConfig",
    "Submission",
    "TaskSpec",
    "VarianceReport",
    "aggregate_instance",
    "bhatia_davis_sigma_max",
    "binarize_likert",
    "binary_to_score",
    "bootstrap_ci",
    "closed_form_variance",
    "likert_to_score",
    "load_default_task_specs",
    "load_instances",
    "load_task_specs",
    "normal_ci_halfwidth",
    "parse_prediction_file",
    "plan_budget",
    "resample_policy_scores",
    "run_case_study",
    "sample_eval_subset",
    "score_submission",
    "se_upper_bound",
    "simulate_annotation_pool",
    "standard_error",
    "validate_submission",
]
