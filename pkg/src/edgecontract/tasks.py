"""Synthetic task population with latent difficulty and realized scores.

Each task carries a hidden difficulty type drawn from the contract's
(beta_L, beta_H) mix and a pair of realized quality scores: what it would
score on the small-dataset model and on the large-dataset model.  Scores
are drawn uniformly from per-type intervals calibrated so that hard tasks
frequently fail the small model's quality threshold while easy tasks clear
it comfortably.
"""

from __future__ import annotations

from dataclasses import dataclass

from .assessment import DifficultyLabel, RealizedPerformance
from .contract import ContractParams
from .errors import ConfigError

LOW_TYPE = "L"
HIGH_TYPE = "H"


@dataclass(frozen=True)
class PerfModelConfig:
    """Score intervals and per-task constants for the synthetic population.

    The defaults straddle the quality threshold: easy tasks always score
    above it on the small model, hard tasks drop below it more often than
    not, and the large model clears it for everyone.  All values are
    calibration choices and can be overridden per scenario.
    """

    score_low_easy: tuple[float, float] = (1.45, 1.60)
    score_low_hard: tuple[float, float] = (1.15, 1.42)
    score_high: tuple[float, float] = (1.55, 1.75)
    payload_bits: float = 1_000_000.0
    compute_demand: float = 1.0
    seed: int = 0


@dataclass
class AigcTask:
    """One offloadable image-enhancement task."""

    id: int
    latent_type: str  # LOW_TYPE or HIGH_TYPE
    realized: RealizedPerformance
    gateway_id: int
    payload_bits: float
    compute_demand: float
    assessed: DifficultyLabel | None = None  # set exactly once, before allocation


def validate_perf_config(config: PerfModelConfig, params: ContractParams) -> None:
    """Interval sanity plus the threshold rules; raises ConfigError."""
    for name in ("score_low_easy", "score_low_hard", "score_high"):
        lo, hi = getattr(config, name)
        if lo > hi:
            raise ConfigError(f"{name}: lower bound {lo} exceeds upper bound {hi}")
    # hard tasks may fail the small model, everything else must clear I_r1
    if config.score_low_easy[0] <= params.I_r1:
        raise ConfigError(f"score_low_easy must stay above I_r1={params.I_r1}")
    if config.score_high[0] <= params.I_r1:
        raise ConfigError(f"score_high must stay above I_r1={params.I_r1}")
    if config.payload_bits < 0:
        raise ConfigError("payload_bits must be nonnegative")
    if config.compute_demand < 0:
        raise ConfigError("compute_demand must be nonnegative")


def realized_scores(latent: str, config: PerfModelConfig, rng) -> RealizedPerformance:
    """Draw the score pair for one task of the given latent type."""
    lo, hi = config.score_low_easy if latent == LOW_TYPE else config.score_low_hard
    score_low = float(rng.uniform(lo, hi))
    lo, hi = config.score_high
    score_high = float(rng.uniform(lo, hi))
    return RealizedPerformance(score_low=score_low, score_high=score_high)


def sample_task(
    task_id: int,
    config: PerfModelConfig,
    params: ContractParams,
    rng,
    num_gateways: int = 1,
) -> AigcTask:
    """Draw one task: latent type, realized scores, then origin gateway."""
    latent = HIGH_TYPE if rng.random() < params.beta_H else LOW_TYPE
    realized = realized_scores(latent, config, rng)
    gateway_id = int(rng.integers(num_gateways))
    return AigcTask(
        id=task_id,
        latent_type=latent,
        realized=realized,
        gateway_id=gateway_id,
        payload_bits=config.payload_bits,
        compute_demand=config.compute_demand,
    )


def generate_tasks(
    n: int,
    config: PerfModelConfig,
    params: ContractParams,
    rng,
    num_gateways: int = 1,
) -> list[AigcTask]:
    """Sample the full population sequentially from one generator stream."""
    if n < 1:
        raise ConfigError("need at least one task")
    return [sample_task(i, config, params, rng, num_gateways) for i in range(n)]
