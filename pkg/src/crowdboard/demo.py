"""Synthetic instances and predictions for demos and pipeline tests.

No real datasets ship with the package; these generators produce structurally
faithful stand-ins (question/answer, observation pairs, source/reference,
article/summary) with controllable prediction quality.
"""

from __future__ import annotations

from .model import Instance, TaskSpec
from .rng import make_generator

_VOCAB = (
    "river mountain garden engine window harvest signal lantern meadow copper "
    "journey whisper granite horizon thunder village compass antler marble "
    "orchard bridge falcon ember quarry sail timber beacon cedar prairie drift"
).split()

_FIELD_SETS = {
    "question": ("question",),
    "observation_1": ("observation_1", "observation_2"),
    "source": ("source",),
    "article": ("article",),
}


def _sentence(rng, words: int) -> str:
    tokens = [str(_VOCAB[int(i)]) for i in rng.integers(0, len(_VOCAB), size=words)]
    return " ".join(tokens) + "."


def _input_fields_for(task: TaskSpec, rng) -> dict[str, str]:
    template = task.prompt_template
    fields: dict[str, str] = {}
    for marker, names in _FIELD_SETS.items():
        if "{" + marker + "}" in template:
            for name in names:
                fields[name] = _sentence(rng, 12 if name != "article" else 40)
    if not fields:
        fields["question"] = _sentence(rng, 12)
    return fields


def make_demo_instances(task: TaskSpec, n: int, seed: int = 0) -> list[Instance]:
    rng = make_generator(seed)
    instances = []
    for i in range(n):
        instances.append(
            Instance(
                instance_id=f"{task.task_id}-t{i:05d}",
                input_fields=tuple(_input_fields_for(task, rng).items()),
                references=(_sentence(rng, 10),),
                split="test",
            )
        )
    return instances


def make_demo_predictions(
    instances: list[Instance], quality: float = 0.7, seed: int = 0
) -> dict[str, str]:
    """Predictions that keep roughly `quality` of each reference's tokens."""
    rng = make_generator(seed)
    predictions = {}
    for inst in instances:
        tokens = inst.references[0].rstrip(".").split()
        kept = [
            tok if rng.random() < quality else str(_VOCAB[int(rng.integers(0, len(_VOCAB)))])
            for tok in tokens
        ]
        predictions[inst.instance_id] = " ".join(kept) + "."
    return predictions
