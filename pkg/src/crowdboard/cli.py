"""Operator command line: validate, submit, plan, score, simulate, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .aggregation import AggregationPolicy, score_submission
from .clock import SystemClock, VirtualClock
from .errors import RateLimitedError
from .events import FileEventLog
from .metrics import score_corpus
from .model import AnnotationRecord
from .pipeline import Platform, PlatformConfig
from .planner import DEFAULT_LOT, plan_budget
from .pool import SimulatedPool, make_pool_profiles
from .rng import derive_seed
from .simulate import SimConfig, render_report_text, run_case_study
from .store import Store
from .taskconfig import (
    default_config_path,
    load_instances,
    load_task_specs,
)
from .uncertainty import DEFAULT_RESAMPLES, bootstrap_ci
from .validation import parse_prediction_file, validate_submission


def _echo_report(data: dict, fmt: str, out: str | None, text: str | None = None):
    payload = json.dumps(data, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(payload + "\n", encoding="utf-8")
    if fmt == "json":
        click.echo(payload)
    else:
        click.echo(text if text is not None else payload)


def _load_tasks(config: str | None):
    path = config or default_config_path()
    return {t.task_id: t for t in load_task_specs(path)}


def _load_instance_dir(instances_dir: str, task_ids) -> dict:
    mapping = {}
    root = Path(instances_dir)
    for task_id in task_ids:
        path = root / f"{task_id}.jsonl"
        if path.exists():
            mapping[task_id] = {i.instance_id: i for i in load_instances(path)}
    return mapping


def _build_platform(
    data_dir: str,
    config: str | None,
    instances_dir: str | None,
    master_seed: int,
    backend_kind: str = "none",
    clock=None,
    rate_capacity: int = 3,
    rate_refill_seconds: float = 7 * 86400 / 3,
    timezone: str = "America/Los_Angeles",
) -> Platform:
    from .dispatch import ScheduleConfig
    from .store import RateLimitConfig

    tasks = _load_tasks(config)
    instances = _load_instance_dir(instances_dir, tasks) if instances_dir else {}
    root = Path(data_dir)
    store = Store(
        FileEventLog(root / "events.jsonl"),
        tasks,
        instances,
        rate_config=RateLimitConfig(rate_capacity, rate_refill_seconds),
        snapshot_path=root / "snapshot.json",
    )
    backend = None
    if backend_kind == "pool":
        roster = make_pool_profiles(
            12, sorted(tasks), derive_seed(master_seed, "pool-roster")
        )
        backend = SimulatedPool(
            roster, instances, seed=derive_seed(master_seed, "pool-labels")
        )
    return Platform(
        store,
        PlatformConfig(
            master_seed=master_seed, schedule=ScheduleConfig(timezone=timezone)
        ),
        clock=clock or SystemClock(),
        backend=backend,
    )


@click.group()
@click.version_option(version=__version__, prog_name="crowdboard")
def main():
    """Human-in-the-loop evaluation leaderboard for text generation."""


@main.command()
@click.option("--task", "task_id", required=True)
@click.option("--predictions", "predictions_path", required=True, type=click.Path(exists=True))
@click.option("--instances", "instances_path", required=True, type=click.Path(exists=True))
@click.option("--config", default=None, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.option("--out", default=None)
def validate(task_id, predictions_path, instances_path, config, fmt, out):
    """Check a prediction file against a task's evaluation ids."""
    tasks = _load_tasks(config)
    if task_id not in tasks:
        raise click.ClickException(f"unknown task: {task_id}")
    test_ids = {
        i.instance_id for i in load_instances(instances_path) if i.split == "test"
    }
    predictions = parse_prediction_file(Path(predictions_path))
    report = validate_submission(predictions, tasks[task_id], test_ids)
    lines = ["ok" if report.ok else "invalid"]
    lines += [f"  {v}" for v in report.violations[:50]]
    if len(report.violations) > 50:
        lines.append(f"  ... and {len(report.violations) - 50} more")
    _echo_report(report.to_dict(), fmt, out, "\n".join(lines))
    if not report.ok:
        sys.exit(1)


@main.command()
@click.option("--task", "task_id", required=True)
@click.option("--submitter", required=True)
@click.option("--predictions", "predictions_path", required=True, type=click.Path(exists=True))
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--config", default=None, type=click.Path(exists=True))
@click.option("--instances-dir", default=None, type=click.Path(exists=True))
@click.option("--master-seed", default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def submit(task_id, submitter, predictions_path, data_dir, config, instances_dir, master_seed, fmt):
    """Submit a prediction file: validates and computes automatic metrics."""
    platform = _build_platform(data_dir, config, instances_dir, master_seed)
    try:
        result = platform.submit(task_id, submitter, Path(predictions_path))
    except RateLimitedError as exc:
        raise click.ClickException(str(exc)) from exc
    text = f"{result.submission_id}: {result.status}"
    if result.violations:
        text += f" ({len(result.violations)} violations)"
    _echo_report(result.to_dict(), fmt, None, text)
    if result.status == "rejected":
        sys.exit(1)


@main.command("plan-budget")
@click.option("--cost-per-instance", required=True, type=float)
@click.option("--target-se", default=None, type=float)
@click.option("--budget", default=None, type=float)
@click.option("--k", default=1, show_default=True)
@click.option("--lot", default=DEFAULT_LOT, show_default=True)
@click.option("--available", default=None, type=int)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.option("--out", default=None)
def plan_budget_cmd(cost_per_instance, target_se, budget, k, lot, available, fmt, out):
    """Size an evaluation against an SE target or a cost ceiling."""
    plan = plan_budget(
        cost_per_instance,
        target_se=target_se,
        max_cost=budget,
        k=k,
        lot=lot,
        available=available,
    )
    text = (
        f"n={plan.n_instances} instances x {plan.labels_per_instance} label(s)\n"
        f"cost=${plan.total_cost:.2f}\n"
        f"worst-case SE={plan.worst_case_se:.5f}"
    )
    _echo_report(plan.to_dict(), fmt, out, text)


@main.command()
@click.option("--task", "task_id", required=True)
@click.option("--records", "records_path", required=True, type=click.Path(exists=True))
@click.option("--config", default=None, type=click.Path(exists=True))
@click.option("--elicitation", type=click.Choice(["likert5", "binary"]), default="likert5")
@click.option("--combine", type=click.Choice(["mean", "majority_vote"]), default="mean")
@click.option("--labeling", type=click.Choice(["unilabeling", "multilabeling"]), default="unilabeling")
@click.option("--k", default=1, show_default=True)
@click.option("--resamples", default=DEFAULT_RESAMPLES, show_default=True)
@click.option("--level", default=0.95, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.option("--out", default=None)
def score(task_id, records_path, config, elicitation, combine, labeling, k, resamples, level, seed, fmt, out):
    """Aggregate annotation records (JSONL) into scores with bootstrap CIs."""
    tasks = _load_tasks(config)
    if task_id not in tasks:
        raise click.ClickException(f"unknown task: {task_id}")
    records = []
    with open(records_path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(AnnotationRecord.from_dict(json.loads(line)))
    policy = AggregationPolicy(
        elicitation=elicitation, combine=combine, labeling=labeling, k=k
    )
    per_aspect = score_submission(records, tasks[task_id], policy)
    output, lines = {}, []
    for aspect, (estimate, instance_scores) in sorted(per_aspect.items()):
        ci = bootstrap_ci(instance_scores, level=level, resamples=resamples,
                          seed=derive_seed(seed, "bootstrap", aspect))
        output[aspect] = {**ci.to_dict(), "display": ci.display()}
        d = ci.display()
        lines.append(
            f"{aspect}: {d['mean']:.1f} +{d['plus']:.1f}/-{d['minus']:.1f} "
            f"(n={ci.n}, estimate={estimate:.4f})"
        )
    _echo_report(output, fmt, out, "\n".join(lines))


@main.command()
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True))
@click.option("--level", default=0.95, show_default=True)
@click.option("--resamples", default=DEFAULT_RESAMPLES, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.option("--out", default=None)
def bootstrap(scores_path, level, resamples, seed, fmt, out):
    """Percentile-bootstrap CI for a file of scores (one per line)."""
    text = Path(scores_path).read_text(encoding="utf-8").strip()
    if text.startswith("["):
        values = json.loads(text)
    else:
        values = [float(line) for line in text.splitlines() if line.strip()]
    estimate = bootstrap_ci(values, level=level, resamples=resamples, seed=seed)
    d = estimate.display()
    _echo_report(
        estimate.to_dict(),
        fmt,
        out,
        f"mean={estimate.mean:.4f} CI=[{estimate.ci_low:.4f}, {estimate.ci_high:.4f}]"
        f" ({d['mean']:.1f} +{d['plus']:.1f}/-{d['minus']:.1f}, n={estimate.n})",
    )


@main.command("simulate-reproducibility")
@click.option("--n", "n_instances", default=360, show_default=True)
@click.option("--k", default=3, show_default=True)
@click.option("--rounds", default=500, show_default=True)
@click.option("--days", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--scheme", type=click.Choice(["likert5", "binary"]), default=None)
@click.option("--combine", type=click.Choice(["mean", "majority_vote"]), default=None)
@click.option("--noise-sd", default=0.10, show_default=True)
@click.option("--day-drift", default=0.0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.option("--out", default=None)
def simulate_reproducibility(n_instances, k, rounds, days, seed, scheme, combine, noise_sd, day_drift, fmt, out):
    """Replay the annotation-policy study on a simulated annotator pool."""
    config = SimConfig(
        n_instances=n_instances,
        k=k,
        rounds=rounds,
        scheme=scheme,
        combine=combine,
        days=tuple(f"day-{i + 1}" for i in range(days)),
        seed=seed,
        noise_sd=noise_sd,
        day_drift=day_drift,
    )
    report = run_case_study(config)
    _echo_report(report.to_dict(), fmt, out, render_report_text(report))


@main.command("metrics")
@click.option("--predictions", "predictions_path", required=True, type=click.Path(exists=True))
@click.option("--instances", "instances_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.option("--out", default=None)
def metrics_cmd(predictions_path, instances_path, fmt, out):
    """Native automatic metrics for a prediction file against references."""
    predictions = parse_prediction_file(Path(predictions_path))
    instances = {i.instance_id: i for i in load_instances(instances_path)}
    ids = sorted(set(predictions) & set(instances))
    if not ids:
        raise click.ClickException("no overlapping ids between predictions and instances")
    hyps = [predictions[iid] for iid in ids]
    refs = [list(instances[iid].references) for iid in ids]
    results = score_corpus(hyps, refs)
    data = {name: r.to_dict() for name, r in sorted(results.items())}
    text = "\n".join(
        f"{name}: {r.corpus_score:.2f}" for name, r in sorted(results.items())
    )
    _echo_report(data, fmt, out, text)


@main.command("load-fixtures")
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--fixtures", "fixtures_path", default=None, type=click.Path(exists=True))
@click.option("--config", default=None, type=click.Path(exists=True))
def load_fixtures(data_dir, fixtures_path, config):
    """Seed the demo leaderboard entries into a data directory."""
    from importlib import resources

    platform = _build_platform(data_dir, config, None, 0)
    if fixtures_path is None:
        fixtures_path = str(
            resources.files("crowdboard").joinpath("data/demo_leaderboard.json")
        )
    count = platform.load_fixture_entries(fixtures_path)
    click.echo(f"loaded {count} fixture entries")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
@click.option("--data-dir", required=True, type=click.Path(),
              envvar="CROWDBOARD_DATA_DIR")
@click.option("--config", default=None, type=click.Path(exists=True),
              envvar="CROWDBOARD_CONFIG")
@click.option("--instances-dir", default=None, type=click.Path(exists=True))
@click.option("--master-seed", default=0, show_default=True)
@click.option("--backend", type=click.Choice(["none", "pool"]), default="none",
              show_default=True)
@click.option("--static-dir", default=None, type=click.Path(exists=True))
@click.option("--rate-capacity", default=3, show_default=True)
@click.option("--rate-refill-seconds", default=7 * 86400 / 3, show_default=True)
@click.option("--timezone", default="America/Los_Angeles", show_default=True,
              envvar="CROWDBOARD_TZ")
def serve(host, port, data_dir, config, instances_dir, master_seed, backend,
          static_dir, rate_capacity, rate_refill_seconds, timezone):
    """Run the leaderboard HTTP service."""
    import uvicorn

    from .service import create_app

    platform = _build_platform(
        data_dir, config, instances_dir, master_seed, backend,
        rate_capacity=rate_capacity,
        rate_refill_seconds=rate_refill_seconds,
        timezone=timezone,
    )
    app = create_app(platform, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--config", default=None, type=click.Path(exists=True))
@click.option("--instances-dir", default=None, type=click.Path(exists=True))
@click.option("--master-seed", default=0, show_default=True)
def step(data_dir, config, instances_dir, master_seed):
    """Advance the pipeline one step (idempotent; cron-safe)."""
    platform = _build_platform(data_dir, config, instances_dir, master_seed, "pool")
    report = platform.run_pipeline_step()
    click.echo(json.dumps(report, sort_keys=True))


@main.command()
@click.option("--task", "task_id", default="arc_da", show_default=True)
@click.option("--n-instances", default=60, show_default=True)
@click.option("--master-seed", default=0, show_default=True)
def demo(task_id, n_instances, master_seed):
    """End-to-end offline demo: synthetic task, simulated annotators."""
    import tempfile

    from datetime import datetime, timezone

    from .demo import make_demo_instances, make_demo_predictions

    with tempfile.TemporaryDirectory() as tmp:
        tasks = _load_tasks(None)
        if task_id not in tasks:
            raise click.ClickException(f"unknown task: {task_id}")
        instances = make_demo_instances(tasks[task_id], n_instances, seed=master_seed)
        inst_dir = Path(tmp) / "instances"
        inst_dir.mkdir()
        with open(inst_dir / f"{task_id}.jsonl", "w", encoding="utf-8") as fh:
            for inst in instances:
                fh.write(json.dumps(inst.to_dict()) + "\n")
        clock = VirtualClock(datetime(2021, 3, 1, 15, 0, tzinfo=timezone.utc))
        platform = _build_platform(
            str(Path(tmp) / "data"), None, str(inst_dir), master_seed, "pool", clock
        )
        predictions = make_demo_predictions(instances, quality=0.7, seed=master_seed)
        result = platform.submit(task_id, "demo-user", predictions)
        click.echo(f"submitted: {result.submission_id} ({result.status})")
        platform.run_until_scored(result.submission_id)
        view = platform.get_submission(result.submission_id)
        click.echo(json.dumps({"human": view["human"], "plan": view["plan"]}, indent=2, sort_keys=True))
        board = platform.get_leaderboard(task_id)
        for entry in board["entries"]:
            display = entry["human"][board["sort_aspect"]]["display"]
            click.echo(
                f"{entry['submitter']}: {display['mean']:.1f} "
                f"+{display['plus']:.1f}/-{display['minus']:.1f}"
            )


if __name__ == "__main__":
    main()
