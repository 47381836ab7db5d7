"""Evaluation-subset sampling and sample-size planning under cost/SE targets.

The worst-case standard error of a [0, 1] score mean over N labels is
0.5/sqrt(N) (variance bound at mu = 0.5), so an SE target translates
directly into a minimum label count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, PlanningError
from .rng import make_generator
from .uncertainty import se_upper_bound

# SE-driven sample sizes are bought in round lots once at least one full lot
# is needed; rounding is always upward so the SE target is never missed.
# lot=1 disables quantization. Cost-driven sizes are never rounded up.
DEFAULT_LOT = 100


@dataclass(frozen=True)
class BudgetPlan:
    """A planned evaluation size with its cost and worst-case precision."""

    n_instances: int
    labels_per_instance: int
    total_cost: float
    worst_case_se: float
    target: dict  # {"kind": "max_se" | "max_cost", "value": float}

    def to_dict(self) -> dict:
        return {
            "n_instances": self.n_instances,
            "labels_per_instance": self.labels_per_instance,
            "total_cost": round(self.total_cost, 2),
            "worst_case_se": self.worst_case_se,
            "target": dict(self.target),
        }


def sample_eval_subset(test_ids: set[str] | list[str], n: int, seed: int) -> list[str]:
    """Sample n ids uniformly without replacement; deterministic given seed.

    Ids are sorted before sampling so the result does not depend on set
    iteration order.
    """
    ids = sorted(test_ids)
    if n > len(ids):
        raise DomainError(f"cannot sample {n} ids from {len(ids)} available")
    if n < 0:
        raise DomainError("n must be >= 0")
    rng = make_generator(seed)
    chosen = rng.choice(len(ids), size=n, replace=False)
    return [ids[i] for i in chosen]


def plan_budget(
    per_instance_cost: float,
    target_se: float | None = None,
    max_cost: float | None = None,
    k: int = 1,
    lot: int = DEFAULT_LOT,
    available: int | None = None,
) -> BudgetPlan:
    """Plan the instance count against an SE target or a cost ceiling.

    Exactly one of target_se / max_cost must be given. For an SE target the
    planner takes the smallest n with 0.5/sqrt(n*k) <= target_se, rounded up
    to the lot size (never missing the target); for a cost ceiling it takes
    the largest n with n*k*per_instance_cost <= max_cost (never exceeding
    the budget).
    """
    if per_instance_cost <= 0:
        raise DomainError("per_instance_cost must be positive")
    if k < 1:
        raise DomainError("k must be >= 1")
    if lot < 1:
        raise DomainError("lot must be >= 1")
    if (target_se is None) == (max_cost is None):
        raise DomainError("specify exactly one of target_se or max_cost")

    if target_se is not None:
        if target_se <= 0:
            raise DomainError("target_se must be positive")
        n = math.ceil((0.5 / target_se) ** 2 / k)
        if n >= lot:
            n = math.ceil(n / lot) * lot
        target = {"kind": "max_se", "value": target_se}
    else:
        assert max_cost is not None
        if max_cost <= 0:
            raise DomainError("max_cost must be positive")
        # tolerance absorbs binary float artifacts in currency arithmetic
        n = math.floor(max_cost / (per_instance_cost * k) + 1e-9)
        if n < 1:
            raise PlanningError(
                f"budget {max_cost} cannot afford one instance at "
                f"{per_instance_cost}/instance with k={k}"
            )
        target = {"kind": "max_cost", "value": max_cost}

    if available is not None and n > available:
        raise PlanningError(
            f"plan needs {n} instances but only {available} are available"
        )

    return BudgetPlan(
        n_instances=n,
        labels_per_instance=k,
        total_cost=n * k * per_instance_cost,
        worst_case_se=se_upper_bound(0.5, n * k),
        target=target,
    )
