"""Native reference-based text metrics: BLEU, ROUGE-N/L, and a lite METEOR.

All metrics share one tokenizer (punctuation split off words, whitespace
normalized, case preserved). METEOR here is exact-match only: no stemming or
synonym resources, which the config fingerprint records as "meteor_lite".
"""

from __future__ import annotations

import math
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field

from .errors import DomainError

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


@dataclass(frozen=True)
class MetricResult:
    metric_name: str
    corpus_score: float
    per_instance_scores: tuple[float, ...] = ()
    config_fingerprint: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "metric_name": self.metric_name,
            "corpus_score": self.corpus_score,
            "per_instance_scores": list(self.per_instance_scores),
            "config_fingerprint": self.config_fingerprint,
            "details": dict(self.details),
        }

    @classmethod
    def from_dict(cls, d: dict) -> MetricResult:
        return cls(
            metric_name=d["metric_name"],
            corpus_score=d["corpus_score"],
            per_instance_scores=tuple(d.get("per_instance_scores", ())),
            config_fingerprint=d.get("config_fingerprint", ""),
            details=d.get("details", {}),
        )


def tokenize(text: str) -> list[str]:
    """Split punctuation from words and collapse whitespace; case preserved."""
    return _TOKEN_RE.findall(text)


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_corpus(
    hypotheses: list[str], reference_lists: list[list[str]], max_n: int = 4
) -> MetricResult:
    """Corpus BLEU on the 0-100 scale: pooled clipped n-gram precisions,
    geometric mean over orders 1..max_n, times the brevity penalty.

    No smoothing: any empty pooled precision zeroes the score. The effective
    reference length is the closest reference length per instance (shorter
    wins ties).
    """
    if len(hypotheses) != len(reference_lists):
        raise DomainError(
            f"length mismatch: {len(hypotheses)} hypotheses vs "
            f"{len(reference_lists)} reference lists"
        )
    if any(not refs for refs in reference_lists):
        raise DomainError("every instance needs at least one reference")

    matched = [0] * max_n
    total = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hyp, refs in zip(hypotheses, reference_lists):
        hyp_tokens = tokenize(hyp)
        ref_token_lists = [tokenize(r) for r in refs]
        hyp_len += len(hyp_tokens)
        ref_len += min(
            (len(r) for r in ref_token_lists),
            key=lambda L: (abs(L - len(hyp_tokens)), L),
        )
        for n in range(1, max_n + 1):
            hyp_counts = _ngrams(hyp_tokens, n)
            if not hyp_counts:
                continue
            max_ref_counts: Counter = Counter()
            for ref_tokens in ref_token_lists:
                for gram, count in _ngrams(ref_tokens, n).items():
                    if count > max_ref_counts[gram]:
                        max_ref_counts[gram] = count
            total[n - 1] += sum(hyp_counts.values())
            matched[n - 1] += sum(
                min(count, max_ref_counts[gram]) for gram, count in hyp_counts.items()
            )

    precisions = [
        (matched[i] / total[i]) if total[i] > 0 else None for i in range(max_n)
    ]
    # orders with no n-grams anywhere (0/0) carry no evidence and are skipped;
    # a true zero precision still zeroes the whole score (no smoothing)
    observed = [p for p in precisions if p is not None]
    if hyp_len == 0 or not observed or any(p == 0.0 for p in observed):
        score = 0.0
        brevity_penalty = 0.0 if hyp_len == 0 else _brevity_penalty(hyp_len, ref_len)
    else:
        log_mean = sum(math.log(p) for p in observed) / len(observed)
        brevity_penalty = _brevity_penalty(hyp_len, ref_len)
        score = 100.0 * brevity_penalty * math.exp(log_mean)

    return MetricResult(
        metric_name="bleu",
        corpus_score=score,
        per_instance_scores=(),
        config_fingerprint=f"bleu|tok=punct-split|max_n={max_n}|smooth=none|case=mixed",
        details={
            "precisions": [0.0 if p is None else p for p in precisions],
            "observed_orders": len(observed),
            "brevity_penalty": brevity_penalty,
            "hypothesis_length": hyp_len,
            "reference_length": ref_len,
        },
    )


def _brevity_penalty(hyp_len: int, ref_len: int) -> float:
    if hyp_len >= ref_len:
        return 1.0
    return math.exp(1.0 - ref_len / hyp_len)


def _f_measure(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def rouge_l(hypothesis: list[str], reference: list[str]) -> float:
    """LCS-based F-measure between tokenized hypothesis and reference."""
    lcs = _lcs_length(hypothesis, reference)
    if not hypothesis or not reference:
        return 0.0
    precision = lcs / len(hypothesis)
    recall = lcs / len(reference)
    return _f_measure(precision, recall)


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for token_a in a:
        curr = [0] * (len(b) + 1)
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_n(hypothesis: list[str], reference: list[str], n: int) -> float:
    """Clipped n-gram overlap F-measure between tokenized texts."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if n > len(hypothesis) and n > len(reference):
        warnings.warn(
            f"rouge_n: n={n} exceeds both text lengths "
            f"({len(hypothesis)}, {len(reference)}); score is 0",
            stacklevel=2,
        )
        return 0.0
    hyp_grams = _ngrams(hypothesis, n)
    ref_grams = _ngrams(reference, n)
    overlap = sum(min(count, ref_grams[g]) for g, count in hyp_grams.items())
    hyp_total = sum(hyp_grams.values())
    ref_total = sum(ref_grams.values())
    precision = overlap / hyp_total if hyp_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    return _f_measure(precision, recall)


def meteor_lite(hypothesis: list[str], reference: list[str]) -> float:
    """Exact-match unigram METEOR: recall-weighted F-mean with a chunk penalty.

    F_mean = 10PR / (R + 9P); penalty = 0.5 * (chunks / matches)^3;
    score = F_mean * (1 - penalty).
    """
    matches, chunks = _align(hypothesis, reference)
    if matches == 0:
        return 0.0
    precision = matches / len(hypothesis)
    recall = matches / len(reference)
    f_mean = 10.0 * precision * recall / (recall + 9.0 * precision)
    penalty = 0.5 * (chunks / matches) ** 3
    return f_mean * (1.0 - penalty)


def _align(hypothesis: list[str], reference: list[str]) -> tuple[int, int]:
    """Greedy chunk-minimizing exact alignment: (matches, chunks).

    Walks the hypothesis left to right; each token matches an unused
    reference position, preferring the one that extends the current
    contiguous chunk, else the leftmost unused occurrence.
    """
    positions: dict[str, list[int]] = {}
    for j, token in enumerate(reference):
        positions.setdefault(token, []).append(j)
    used: set[int] = set()
    matches = 0
    chunks = 0
    prev_ref = -2  # sentinel: never adjacent
    for token in hypothesis:
        candidates = [j for j in positions.get(token, ()) if j not in used]
        if not candidates:
            prev_ref = -2
            continue
        if prev_ref + 1 in candidates:
            chosen = prev_ref + 1
        else:
            chosen = candidates[0]
            chunks += 1
        used.add(chosen)
        matches += 1
        prev_ref = chosen
    return matches, chunks


def score_corpus(
    hypotheses: list[str],
    reference_lists: list[list[str]],
) -> dict[str, MetricResult]:
    """All native metrics for one submission against its references.

    Per-instance metrics (ROUGE, METEOR) score against the closest reference
    (max over references) and average over instances; BLEU pools corpus-level
    counts.
    """
    if len(hypotheses) != len(reference_lists):
        raise DomainError("length mismatch between hypotheses and references")

    results = {"bleu": bleu_corpus(hypotheses, reference_lists)}

    rouge_variants: dict[str, list[float]] = {"rouge_1": [], "rouge_2": [], "rouge_l": []}
    meteor_scores: list[float] = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # short texts routinely lack bigrams
        for hyp, refs in zip(hypotheses, reference_lists):
            hyp_tokens = tokenize(hyp)
            ref_token_lists = [tokenize(r) for r in refs]
            rouge_variants["rouge_1"].append(
                max(rouge_n(hyp_tokens, r, 1) for r in ref_token_lists)
            )
            rouge_variants["rouge_2"].append(
                max(rouge_n(hyp_tokens, r, 2) for r in ref_token_lists)
            )
            rouge_variants["rouge_l"].append(
                max(rouge_l(hyp_tokens, r) for r in ref_token_lists)
            )
            meteor_scores.append(
                max(meteor_lite(hyp_tokens, r) for r in ref_token_lists) if hyp_tokens else 0.0
            )

    for name, scores in rouge_variants.items():
        results[name] = MetricResult(
            metric_name=name,
            corpus_score=sum(scores) / len(scores) if scores else 0.0,
            per_instance_scores=tuple(scores),
            config_fingerprint=f"{name}|tok=punct-split|case=mixed",
        )
    results["meteor_lite"] = MetricResult(
        metric_name="meteor_lite",
        corpus_score=sum(meteor_scores) / len(meteor_scores) if meteor_scores else 0.0,
        per_instance_scores=tuple(meteor_scores),
        config_fingerprint="meteor_lite|tok=punct-split|exact-match|no-stem|no-synonym",
    )
    return results


NATIVE_METRICS = ("bleu", "rouge_1", "rouge_2", "rouge_l", "meteor_lite")
