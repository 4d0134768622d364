"""Difficulty assessment: assign each task a {1, 2} label before offloading.

Label 1 routes a task to servers hosting the small-dataset model (cheap
bundle), label 2 to the large-dataset model (expensive bundle).  Four
interchangeable label sources are provided:

* ``oracle_assess``          closed-form comparator on the realized scores
* ``realized_comparison_assess``  direct utility comparison of the two buys
* ``noisy_human_assess``     ground truth flipped with probability epsilon
* ``vlm_assess``             recorded labels from a replay file, or a live
                             endpoint speaking a small JSON protocol

All sources are deterministic given their inputs (and seed, for the noisy
one), so full runs stay reproducible.
"""

from __future__ import annotations

import json
import logging
import math
import os
import urllib.error
import urllib.request
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .contract import DEFAULT_UTILITY_FLOOR, ContractMenu, ContractParams, teleoperator_utility
from .errors import ConfigError, DomainError, MalformedResponse, MissingLabel, TransportError

log = logging.getLogger(__name__)

PRICE_VARIANTS = ("corrected", "literal")

# Stand-in instruction text for the live assessor.  Not tuned; replace with
# a prompt engineered for the deployed model before trusting live labels.
DEFAULT_PROMPT_TEMPLATE = (
    "You are grading a low-light image enhancement job. Rate the difficulty "
    "of enhancing the referenced image as 1 (a model trained on a small "
    "dataset suffices) or 2 (a model trained on a large dataset is "
    'required). Respond with JSON: {"difficulty": 1 or 2, "reasoning": "..."}'
)


class DifficultyLabel(IntEnum):
    LOW = 1
    HIGH = 2

    def flipped(self) -> "DifficultyLabel":
        return DifficultyLabel.HIGH if self is DifficultyLabel.LOW else DifficultyLabel.LOW


@dataclass(frozen=True)
class RealizedPerformance:
    """Actual scores a task would obtain on each model class."""

    score_low: float   # on the small-dataset model
    score_high: float  # on the large-dataset model


@dataclass(frozen=True)
class AssessorKind:
    """Tagged selector for a difficulty-label source."""

    kind: str  # one of KINDS
    epsilon: float = 0.1        # noisy-human flip probability
    source: str | None = None   # replay label file path
    endpoint: str | None = None  # live endpoint URL

    KINDS = ("oracle", "realized", "human", "vlm_replay", "vlm_live")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ConfigError(f"unknown assessor kind {self.kind!r}; expected one of {self.KINDS}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon={self.epsilon} must lie in [0, 1]")

    @classmethod
    def oracle(cls) -> "AssessorKind":
        return cls(kind="oracle")

    @classmethod
    def realized(cls) -> "AssessorKind":
        return cls(kind="realized")

    @classmethod
    def human(cls, epsilon: float = 0.1) -> "AssessorKind":
        return cls(kind="human", epsilon=epsilon)

    @classmethod
    def replay(cls, source: str) -> "AssessorKind":
        return cls(kind="vlm_replay", source=source)

    @classmethod
    def live(cls, endpoint: str | None = None) -> "AssessorKind":
        return cls(kind="vlm_live", endpoint=endpoint)


def _check_scores(rp: RealizedPerformance, params: ContractParams) -> None:
    if rp.score_low <= params.I_r1 or rp.score_high <= params.I_r1:
        raise DomainError(
            f"scores ({rp.score_low}, {rp.score_high}) must both exceed I_r1={params.I_r1}"
        )


def _log_threshold(rp: RealizedPerformance, params: ContractParams) -> float:
    """Log of the decision threshold that eta2 is compared against."""
    _check_scores(rp, params)
    params.require_admissible()
    d_low = rp.score_low - params.I_r1
    d_high = rp.score_high - params.I_r1
    theta_gap = params.theta_H - params.theta_L
    ratio = (params.theta_H - params.beta_H * params.theta_H) / (
        params.theta_L - params.beta_H * params.theta_H
    )
    exponent = params.theta_H / theta_gap
    drift = params.eta3 / (params.beta_L * (params.eta1 - params.eta3)) - (
        params.eta3 / theta_gap
    ) * (rp.score_high - rp.score_low)
    return exponent * math.log(ratio * d_low / d_high) + drift - math.log(d_low)


def oracle_threshold(rp: RealizedPerformance, params: ContractParams) -> float:
    """The decision threshold itself (may overflow to inf for extreme scores)."""
    try:
        return math.exp(_log_threshold(rp, params))
    except OverflowError:
        return math.inf


def oracle_assess(rp: RealizedPerformance, params: ContractParams) -> DifficultyLabel:
    """Label 1 when eta2 sits below the decision threshold, else label 2.

    Deterministic.  Raises DomainError when either realized score sits at
    or below the log threshold I_r1; callers route such tasks to label 2.
    """
    if math.log(params.eta2) < _log_threshold(rp, params):
        return DifficultyLabel.LOW
    return DifficultyLabel.HIGH


def oracle_assess_or_high(rp: RealizedPerformance, params: ContractParams) -> DifficultyLabel:
    """Oracle label with the decided fallback: non-scoring tasks go high."""
    try:
        return oracle_assess(rp, params)
    except DomainError:
        return DifficultyLabel.HIGH


def realized_comparison_assess(
    rp: RealizedPerformance,
    menu: ContractMenu,
    params: ContractParams,
    price_variant: str = "corrected",
    floor: float = DEFAULT_UTILITY_FLOOR,
) -> DifficultyLabel:
    """Pick the bundle whose realized purchase leaves the buyer better off.

    Compares the high-type utility of buying the high bundle at its realized
    score against the low-type utility of buying the low bundle.  The
    ``corrected`` variant (default) charges the low bundle's own price on the
    low side; ``literal`` charges the high price on both sides, as the
    comparator is sometimes stated.  Exact ties go to label 2: buying the
    stronger model is the safer default.
    """
    if price_variant not in PRICE_VARIANTS:
        raise ConfigError(f"price_variant must be one of {PRICE_VARIANTS}")
    low_price = menu.low.price if price_variant == "corrected" else menu.high.price
    u_high = teleoperator_utility(params.theta_H, rp.score_high, menu.high.price, params, floor)
    u_low = teleoperator_utility(params.theta_L, rp.score_low, low_price, params, floor)
    return DifficultyLabel.LOW if u_high < u_low else DifficultyLabel.HIGH


def noisy_human_assess(truth: DifficultyLabel, epsilon: float, rng) -> DifficultyLabel:
    """Return ``truth`` with probability 1 - epsilon, the flipped label otherwise."""
    if not 0.0 <= epsilon <= 1.0:
        raise ConfigError(f"epsilon={epsilon} must lie in [0, 1]")
    truth = DifficultyLabel(truth)
    if rng.random() < epsilon:
        return truth.flipped()
    return truth


REPLAY_HEADER = "task_id,difficulty"


def load_replay_labels(path) -> dict[int, DifficultyLabel]:
    """Parse a recorded label file: a header line, then task_id,difficulty rows."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip().lower() != REPLAY_HEADER:
        raise ConfigError(f"{path}: first line must be the header {REPLAY_HEADER!r}")
    labels: dict[int, DifficultyLabel] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ConfigError(f"{path}:{lineno}: expected 'task_id,difficulty'")
        try:
            task_id = int(parts[0])
            difficulty = int(parts[1])
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
        if difficulty not in (1, 2):
            raise ConfigError(f"{path}:{lineno}: difficulty must be 1 or 2")
        if task_id in labels:
            raise ConfigError(f"{path}:{lineno}: duplicate task id {task_id}")
        labels[task_id] = DifficultyLabel(difficulty)
    return labels


@dataclass
class LiveVlmClient:
    """Minimal client for the live assessor protocol.

    Sends a JSON object {"prompt": ..., "image_ref": ...} by POST and expects
    a JSON reply carrying an integer "difficulty" of 1 or 2 (an optional
    "reasoning" string is ignored).
    """

    endpoint: str
    prompt: str = DEFAULT_PROMPT_TEMPLATE
    timeout: float = 10.0

    def assess(self, image_ref: str) -> DifficultyLabel:
        body = json.dumps({"prompt": self.prompt, "image_ref": image_ref}).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint,
            data=body,
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                raw = response.read()
        except (urllib.error.URLError, OSError) as exc:
            raise TransportError(f"assessor endpoint {self.endpoint}: {exc}") from exc
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise MalformedResponse(f"assessor reply is not JSON: {exc}") from exc
        difficulty = payload.get("difficulty") if isinstance(payload, dict) else None
        if isinstance(difficulty, bool) or difficulty not in (1, 2):
            raise MalformedResponse(f"assessor reply lacks a difficulty of 1 or 2: {payload!r}")
        return DifficultyLabel(difficulty)


def resolve_endpoint(kind: AssessorKind) -> str:
    """Endpoint from the kind, else from the VLM_ENDPOINT environment variable."""
    endpoint = kind.endpoint or os.environ.get("VLM_ENDPOINT")
    if not endpoint:
        raise ConfigError("no live endpoint configured (set it in config or VLM_ENDPOINT)")
    return endpoint


def vlm_assess(task_id: int, source: AssessorKind) -> DifficultyLabel:
    """Resolve a recorded or live label for one task.

    Raises MissingLabel on a replay miss and TransportError or
    MalformedResponse on live failures; callers fall back to label 2.
    """
    if source.kind == "vlm_replay":
        if not source.source:
            raise ConfigError("replay assessor needs a label file path")
        labels = load_replay_labels(source.source)
        if task_id not in labels:
            raise MissingLabel(f"no recorded label for task {task_id}")
        return labels[task_id]
    if source.kind == "vlm_live":
        client = LiveVlmClient(endpoint=resolve_endpoint(source))
        return client.assess(f"task-{task_id}")
    raise ConfigError(f"vlm_assess cannot serve assessor kind {source.kind!r}")


def label_grid(params: ContractParams, n: int = 100, span: float = 1.0):
    """Oracle labels over an n x n lattice of realized score pairs.

    Both axes run over (I_r1, I_r1 + span], excluding the singular lower
    edge.  Returns (scores, labels) where labels[i, j] is the label at
    score_low = scores[i], score_high = scores[j].
    """
    if n < 2:
        raise ConfigError("grid needs at least 2 points per axis")
    scores = params.I_r1 + span * np.arange(1, n + 1) / n
    labels = np.empty((n, n), dtype=np.int8)
    for i, s_low in enumerate(scores):
        for j, s_high in enumerate(scores):
            labels[i, j] = int(
                oracle_assess(RealizedPerformance(float(s_low), float(s_high)), params)
            )
    return scores, labels


def label1_region_is_monotone(labels: np.ndarray) -> bool:
    """True when the label-1 region forms a single staircase, island-free.

    Holding score_high fixed and increasing score_low, labels may switch
    2 -> 1 at most once and never back; holding score_low fixed and
    increasing score_high, they may switch 1 -> 2 at most once and never
    back.
    """
    low = labels == int(DifficultyLabel.LOW)
    high = labels == int(DifficultyLabel.HIGH)
    # score_low axis: once label 1 appears it must persist
    if (low[:-1, :] & high[1:, :]).any():
        return False
    # score_high axis: once label 2 appears it must persist
    if (high[:, :-1] & low[:, 1:]).any():
        return False
    return True


def agreement_rate(
    params: ContractParams,
    menu: ContractMenu,
    n: int = 1000,
    rng=None,
    price_variant: str = "corrected",
    span: float = 1.0,
) -> float:
    """Fraction of sampled score pairs where the closed-form comparator and
    the direct utility comparison agree.  Logged by callers; no target is
    enforced."""
    rng = rng if rng is not None else np.random.default_rng(0)
    agree = 0
    for _ in range(n):
        rp = RealizedPerformance(
            score_low=params.I_r1 + float(rng.uniform(1e-3, span)),
            score_high=params.I_r1 + float(rng.uniform(1e-3, span)),
        )
        a = oracle_assess_or_high(rp, params)
        b = realized_comparison_assess(rp, menu, params, price_variant=price_variant)
        agree += a == b
    rate = agree / n
    log.info("assessor agreement rate (%s variant, n=%d): %.4f", price_variant, n, rate)
    return rate
