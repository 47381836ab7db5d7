"""Adapter contract for external learned metrics (BERTScore/BLEURT class).

Heavy neural scorers run out of process. The adapter receives one JSON
record per line ({"id", "hypothesis", "references"}) and must answer with
one JSON record per line ({"id", "score"}). Scores are unclamped reals
(learned metrics may go negative); non-finite values, missing ids, or
timeouts mark the metric unavailable and submission scoring proceeds
without it.
"""

from __future__ import annotations

import json
import math
import subprocess
from dataclasses import dataclass

from .errors import ConfigError, MetricUnavailableError
from .metrics import MetricResult


@dataclass(frozen=True)
class AdapterConfig:
    """How to reach one external scorer. timeout and version are mandatory."""

    name: str
    kind: str  # "command" | "http"
    timeout: float
    version: str
    command: tuple[str, ...] = ()
    url: str = ""

    def __post_init__(self):
        if self.kind not in ("command", "http"):
            raise ConfigError(f"unknown adapter kind: {self.kind!r}")
        if self.timeout <= 0:
            raise ConfigError("adapter timeout must be positive")
        if not self.version:
            raise ConfigError("adapter version is mandatory")
        if self.kind == "command" and not self.command:
            raise ConfigError("command adapter needs a command")
        if self.kind == "http" and not self.url:
            raise ConfigError("http adapter needs a url")
        if isinstance(self.command, list):
            object.__setattr__(self, "command", tuple(self.command))

    @classmethod
    def from_dict(cls, d: dict) -> AdapterConfig:
        return cls(
            name=d["name"],
            kind=d["kind"],
            timeout=float(d["timeout"]),
            version=str(d["version"]),
            command=tuple(d.get("command", ())),
            url=d.get("url", ""),
        )


def _request_lines(
    ids: list[str], hypotheses: list[str], reference_lists: list[list[str]]
) -> str:
    lines = [
        json.dumps(
            {"id": iid, "hypothesis": hyp, "references": refs},
            ensure_ascii=False,
        )
        for iid, hyp, refs in zip(ids, hypotheses, reference_lists)
    ]
    return "\n".join(lines) + "\n"


def _parse_response(raw: str, ids: list[str], adapter: AdapterConfig) -> list[float]:
    scores: dict[str, float] = {}
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            iid, score = obj["id"], float(obj["score"])
        except (ValueError, KeyError, TypeError) as exc:
            raise MetricUnavailableError(
                f"{adapter.name}: malformed response line {lineno}: {exc}"
            ) from exc
        if not math.isfinite(score):
            raise MetricUnavailableError(
                f"{adapter.name}: non-finite score for id {iid!r}"
            )
        scores[iid] = score
    missing = [iid for iid in ids if iid not in scores]
    if missing:
        raise MetricUnavailableError(
            f"{adapter.name}: missing scores for {len(missing)} ids "
            f"(first: {missing[:3]})"
        )
    return [scores[iid] for iid in ids]


def external_metric(
    adapter: AdapterConfig,
    hypotheses: list[str],
    reference_lists: list[list[str]],
    ids: list[str] | None = None,
) -> MetricResult:
    """Run one external scorer over a submission and validate its output."""
    if ids is None:
        ids = [str(i) for i in range(len(hypotheses))]
    if not (len(ids) == len(hypotheses) == len(reference_lists)):
        raise MetricUnavailableError(f"{adapter.name}: input length mismatch")

    payload = _request_lines(ids, hypotheses, reference_lists)
    if adapter.kind == "command":
        raw = _run_command(adapter, payload)
    else:
        raw = _run_http(adapter, payload)

    per_instance = _parse_response(raw, ids, adapter)
    return MetricResult(
        metric_name=adapter.name,
        corpus_score=sum(per_instance) / len(per_instance) if per_instance else 0.0,
        per_instance_scores=tuple(per_instance),
        config_fingerprint=f"{adapter.name}|external|version={adapter.version}",
        details={"adapter_kind": adapter.kind, "version": adapter.version},
    )


def _run_command(adapter: AdapterConfig, payload: str) -> str:
    try:
        proc = subprocess.run(
            list(adapter.command),
            input=payload,
            capture_output=True,
            text=True,
            timeout=adapter.timeout,
        )
    except subprocess.TimeoutExpired as exc:
        raise MetricUnavailableError(
            f"{adapter.name}: timed out after {adapter.timeout}s"
        ) from exc
    except OSError as exc:
        raise MetricUnavailableError(f"{adapter.name}: {exc}") from exc
    if proc.returncode != 0:
        raise MetricUnavailableError(
            f"{adapter.name}: exit code {proc.returncode}: {proc.stderr[:200]}"
        )
    return proc.stdout


def _run_http(adapter: AdapterConfig, payload: str) -> str:
    import httpx

    try:
        response = httpx.post(
            adapter.url,
            content=payload.encode("utf-8"),
            headers={"content-type": "application/x-ndjson"},
            timeout=adapter.timeout,
        )
        response.raise_for_status()
    except httpx.HTTPError as exc:
        raise MetricUnavailableError(f"{adapter.name}: {exc}") from exc
    return response.text
