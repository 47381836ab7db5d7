"""Task catalogue loading from human-editable YAML config."""

from __future__ import annotations

import io
from importlib import resources
from pathlib import Path

import yaml

from .errors import ConfigError, DomainError
from .model import AspectSpec, ElicitationScheme, Instance, TaskSpec


def default_config_path() -> Path:
    """Path of the packaged default task catalogue (the four demo tasks)."""
    return Path(str(resources.files("crowdboard").joinpath("data/default_tasks.yaml")))


def load_task_specs(config_source: str | Path | io.TextIOBase | dict) -> list[TaskSpec]:
    """Load TaskSpecs from a YAML path, an open stream, or a parsed mapping.

    Raises ConfigError on duplicate task ids or invalid field values.
    """
    if isinstance(config_source, dict):
        doc = config_source
    elif isinstance(config_source, io.TextIOBase):
        doc = yaml.safe_load(config_source)
    else:
        text = Path(config_source).read_text(encoding="utf-8")
        doc = yaml.safe_load(text)

    if doc is None:
        return []
    if not isinstance(doc, dict) or "tasks" not in doc:
        raise ConfigError("task config must be a mapping with a 'tasks' list")
    raw_tasks = doc["tasks"] or []

    specs: list[TaskSpec] = []
    seen: set[str] = set()
    for raw in raw_tasks:
        try:
            spec = _task_from_mapping(raw)
        except (DomainError, KeyError, TypeError) as exc:
            raise ConfigError(f"bad task entry {raw.get('task_id', '?')!r}: {exc}") from exc
        if spec.task_id in seen:
            raise ConfigError(f"duplicate task_id: {spec.task_id!r}")
        seen.add(spec.task_id)
        specs.append(spec)
    return specs


def load_default_task_specs() -> list[TaskSpec]:
    return load_task_specs(default_config_path())


def _task_from_mapping(raw: dict) -> TaskSpec:
    elicitation = raw["elicitation"]
    if isinstance(elicitation, str):
        scheme = ElicitationScheme(kind=elicitation)
    else:
        scheme = ElicitationScheme.from_dict(elicitation)
    aspects = []
    for a in raw["aspects"]:
        if isinstance(a, str):
            aspects.append(AspectSpec(name=a))
        else:
            aspects.append(AspectSpec.from_dict(a))
    return TaskSpec(
        task_id=raw["task_id"],
        name=raw.get("name", raw["task_id"]),
        elicitation=scheme,
        aspects=tuple(aspects),
        eval_sample_size=int(raw["eval_sample_size"]),
        per_instance_cost=float(raw["per_instance_cost"]),
        paired_with_gold=bool(raw.get("paired_with_gold", False)),
        blind_permutation=bool(raw.get("blind_permutation", False)),
        instructions=raw.get("instructions", ""),
        prompt_template=raw.get("prompt_template", ""),
    )


def load_instances(path: str | Path) -> list[Instance]:
    """Load instances from a JSONL file (one instance object per line)."""
    import json

    instances: list[Instance] = []
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                inst = Instance.from_dict(obj)
            except (ValueError, KeyError) as exc:
                raise ConfigError(f"{path}:{lineno}: bad instance record: {exc}") from exc
            key = (inst.instance_id, inst.split)
            if key in seen:
                raise ConfigError(
                    f"{path}:{lineno}: duplicate instance_id {inst.instance_id!r} "
                    f"in split {inst.split!r}"
                )
            seen.add(key)
            instances.append(inst)
    return instances
