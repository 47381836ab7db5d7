from __future__ import annotations

from datetime import datetime, timezone

import pytest

from crowdboard.clock import VirtualClock
from crowdboard.demo import make_demo_instances, make_demo_predictions
from crowdboard.events import InMemoryEventLog
from crowdboard.pipeline import Platform, PlatformConfig
from crowdboard.pool import SimulatedPool, make_pool_profiles
from crowdboard.rng import derive_seed
from crowdboard.store import Store
from crowdboard.taskconfig import load_default_task_specs

MONDAY_MORNING = datetime(2021, 3, 1, 15, 0, tzinfo=timezone.utc)  # 7am PT


@pytest.fixture(scope="session")
def default_tasks():
    return {t.task_id: t for t in load_default_task_specs()}


@pytest.fixture
def arc_task(default_tasks):
    return default_tasks["arc_da"]


@pytest.fixture
def xsum_task(default_tasks):
    return default_tasks["xsum"]


def build_platform(
    tasks,
    instances_by_task,
    master_seed=0,
    log=None,
    backend="pool",
    clock=None,
    config=None,
    snapshot_path=None,
):
    """One-call assembly of a platform over an in-memory (or given) log."""
    store = Store(
        log if log is not None else InMemoryEventLog(),
        tasks,
        instances_by_task,
        snapshot_path=snapshot_path,
    )
    pool = None
    if backend == "pool":
        roster = make_pool_profiles(
            12, sorted(tasks), derive_seed(master_seed, "pool-roster")
        )
        pool = SimulatedPool(
            roster, instances_by_task, seed=derive_seed(master_seed, "pool-labels")
        )
    return Platform(
        store,
        config or PlatformConfig(master_seed=master_seed),
        clock=clock or VirtualClock(MONDAY_MORNING),
        backend=pool,
    )


@pytest.fixture
def arc_world(default_tasks):
    """A small ARC-DA world: 40 instances, predictions, ready-to-go platform."""
    task = default_tasks["arc_da"]
    instances = make_demo_instances(task, 40, seed=3)
    inst_map = {"arc_da": {i.instance_id: i for i in instances}}
    platform = build_platform(default_tasks, inst_map, master_seed=7)
    predictions = make_demo_predictions(instances, quality=0.7, seed=11)
    return platform, instances, predictions
