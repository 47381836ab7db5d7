"""Confidence intervals via percentile bootstrap, plus analytic SE bounds.

The bootstrap is deterministic given a seed: resample index matrices are
drawn block-by-block (BOOTSTRAP_BLOCK resamples per block) from generators
seeded as SeedSequence(seed, spawn_key=(block,)), so blocks could run in
parallel without changing results. Quantiles use the nearest-rank convention
on the sorted resample means; no interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

DEFAULT_RESAMPLES = 10_000
BOOTSTRAP_BLOCK = 1024  # resamples per derived seed stream; fixed for replay


@dataclass(frozen=True)
class ScoreEstimate:
    """An aggregated score with its sample count and confidence interval."""

    mean: float
    n: int
    ci_low: float
    ci_high: float
    level: float = 0.95
    method: str = "percentile_bootstrap"
    seed: int | None = None

    def __post_init__(self):
        if not self.ci_low <= self.ci_high:
            raise DomainError(
                f"ci_low {self.ci_low} must not exceed ci_high {self.ci_high}"
            )
        if not 0 < self.level < 1:
            raise DomainError("confidence level must be in (0, 1)")

    def display(self) -> dict:
        """Percentage-point presentation: mean x100 with +/- CI arms."""
        return {
            "mean": round(self.mean * 100, 1),
            "plus": round((self.ci_high - self.mean) * 100, 1),
            "minus": round((self.mean - self.ci_low) * 100, 1),
        }

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "n": self.n,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "level": self.level,
            "method": self.method,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ScoreEstimate:
        return cls(
            mean=d["mean"],
            n=d["n"],
            ci_low=d["ci_low"],
            ci_high=d["ci_high"],
            level=d.get("level", 0.95),
            method=d.get("method", "percentile_bootstrap"),
            seed=d.get("seed"),
        )


@dataclass(frozen=True)
class SEBound:
    """Worst-case standard error for a bounded score at a given mean."""

    mu: float
    m: float
    M: float
    sigma_max: float
    n: int
    se_max: float

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "m": self.m,
            "M": self.M,
            "sigma_max": self.sigma_max,
            "n": self.n,
            "se_max": self.se_max,
        }


def standard_error(sigma: float, n: int) -> float:
    """Standard error of a mean of n samples with per-sample std dev sigma."""
    if sigma < 0:
        raise DomainError("sigma must be >= 0")
    if n < 1:
        raise DomainError("n must be >= 1")
    return sigma / math.sqrt(n)


def bhatia_davis_sigma_max(mu: float, m: float = 0.0, M: float = 1.0) -> float:
    """Largest possible std dev of a variable in [m, M] with mean mu."""
    if not m <= mu <= M:
        raise DomainError(f"mu {mu} must lie in [{m}, {M}]")
    return math.sqrt((M - mu) * (mu - m))


def se_upper_bound(mu: float, n: int) -> float:
    """Worst-case standard error for [0, 1] scores with mean mu, n samples."""
    if not 0.0 <= mu <= 1.0:
        raise DomainError("mu must be in [0, 1]")
    if n < 1:
        raise DomainError("n must be >= 1")
    return math.sqrt(mu * (1.0 - mu) / n)


def se_bound(mu: float, n: int, m: float = 0.0, M: float = 1.0) -> SEBound:
    sigma = bhatia_davis_sigma_max(mu, m, M)
    return SEBound(mu=mu, m=m, M=M, sigma_max=sigma, n=n, se_max=standard_error(sigma, n))


def normal_ci_halfwidth(sigma: float, n: int) -> float:
    """Half-width of the normal-approximation 95% CI: 1.96 * sigma / sqrt(n)."""
    return 1.96 * standard_error(sigma, n)


def nearest_rank_quantile(sorted_values: np.ndarray, q: float) -> float:
    """Nearest-rank quantile: smallest value with at least q*N values <= it."""
    n = len(sorted_values)
    if n == 0:
        raise DomainError("empty sample")
    rank = max(1, math.ceil(q * n))
    return float(sorted_values[min(rank, n) - 1])


def bootstrap_means(
    values: np.ndarray, resamples: int, seed: int
) -> np.ndarray:
    """Means of `resamples` with-replacement resamples of `values`."""
    n = len(values)
    means = np.empty(resamples, dtype=np.float64)
    pos = 0
    block_index = 0
    while pos < resamples:
        count = min(BOOTSTRAP_BLOCK, resamples - pos)
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block_index,)))
        )
        idx = rng.integers(0, n, size=(count, n))
        means[pos : pos + count] = values[idx].mean(axis=1)
        pos += count
        block_index += 1
    return means


def bootstrap_ci(
    instance_scores: list[float] | np.ndarray,
    level: float = 0.95,
    resamples: int = DEFAULT_RESAMPLES,
    seed: int = 0,
) -> ScoreEstimate:
    """Percentile-bootstrap confidence interval for the mean of the scores.

    Deterministic given (scores, level, resamples, seed); the interval is the
    nearest-rank (1-level)/2 and 1-(1-level)/2 quantiles of the resampled
    means. Intervals may be asymmetric around the mean.
    """
    values = np.asarray(instance_scores, dtype=np.float64)
    if values.size == 0:
        raise DomainError("cannot bootstrap an empty score list")
    if resamples < 1:
        raise DomainError("resamples must be >= 1")
    if not 0 < level < 1:
        raise DomainError("confidence level must be in (0, 1)")

    means = bootstrap_means(values, resamples, seed)
    means.sort()
    alpha = (1.0 - level) / 2.0
    return ScoreEstimate(
        mean=float(values.mean()),
        n=int(values.size),
        ci_low=nearest_rank_quantile(means, alpha),
        ci_high=nearest_rank_quantile(means, 1.0 - alpha),
        level=level,
        method="percentile_bootstrap",
        seed=seed,
    )
