"""Normalization and weighted aggregation of the five assessment signals.

Every signal produced by the assessment requests (validated source count,
hallucination finding count, self-assessment score, political spectrum,
monetary interest) is mapped onto a unit scale, then combined into a single
confidence score by a weighted sum. All functions here are pure and
thread-safe.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

# Weight order: (sources, self-assessment, political, monetary, hallucinations)
DEFAULT_WEIGHTS: Tuple[float, float, float, float, float] = (0.1, 0.5, 0.05, 0.05, 0.3)

WEIGHT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class RawScores:
    """The five raw assessment signals, validated against their scales.

    Out-of-range provider output must be clamped (and flagged) before it
    gets here; construction rejects anything outside the declared ranges.
    """

    source_count: int
    hallucination_count: int
    self_assessment: int  # 0..100
    political: int  # -10..10, 0 is neutral
    monetary: int  # 0..10, 0 is "very unlikely to be paid content"

    def __post_init__(self) -> None:
        if self.source_count < 0:
            raise ValueError(f"source_count must be >= 0, got {self.source_count}")
        if self.hallucination_count < 0:
            raise ValueError(
                f"hallucination_count must be >= 0, got {self.hallucination_count}"
            )
        if not 0 <= self.self_assessment <= 100:
            raise ValueError(
                f"self_assessment must be in 0..100, got {self.self_assessment}"
            )
        if not -10 <= self.political <= 10:
            raise ValueError(f"political must be in -10..10, got {self.political}")
        if not 0 <= self.monetary <= 10:
            raise ValueError(f"monetary must be in 0..10, got {self.monetary}")


@dataclass(frozen=True)
class ConfidenceBreakdown:
    """The five normalized components, their weights, and the aggregate."""

    norm_sources: float
    norm_self: float
    norm_political: float
    norm_monetary: float
    norm_hallucination: float
    confidence: float
    weights: Tuple[float, float, float, float, float] = DEFAULT_WEIGHTS

    def components(self) -> Tuple[float, float, float, float, float]:
        """Components in weight order."""
        return (
            self.norm_sources,
            self.norm_self,
            self.norm_political,
            self.norm_monetary,
            self.norm_hallucination,
        )


def normalize_sources(count: int) -> float:
    """Map a validated-source count to a unit score.

    Zero sources score 0; the first source jumps to 0.5 and each further
    source adds 0.1, capped at 1.0 (reached at six sources).
    """
    if count < 0:
        raise ValueError(f"source count must be >= 0, got {count}")
    if count == 0:
        return 0.0
    return min(1.0, 0.5 + 0.1 * (count - 1))


def normalize_hallucinations(count: int) -> float:
    """Map a hallucination finding count to a unit score.

    No findings score 1.0; each finding costs 0.25, with four or more
    findings flooring the score at 0.
    """
    if count < 0:
        raise ValueError(f"hallucination count must be >= 0, got {count}")
    return max(0.0, 1.0 - count / 4)


def normalize_self_assessment(score: int) -> float:
    """Map the model's 0..100 self-assessment onto the unit scale."""
    if not 0 <= score <= 100:
        raise ValueError(f"self-assessment must be in 0..100, got {score}")
    return score / 100


def normalize_political(score: int) -> float:
    """Map the -10..10 political-spectrum rating to a unit score.

    Scores distance from neutral: 0 (neutral) is best at 1.0, either
    extreme scores 0. Swap in :func:`normalize_political_linear` for a
    plain linear mapping instead.
    """
    if not -10 <= score <= 10:
        raise ValueError(f"political score must be in -10..10, got {score}")
    return 1.0 - abs(score) / 10


def normalize_political_linear(score: int) -> float:
    """Alternative political normalizer: linear map of -10..10 onto 0..1."""
    if not -10 <= score <= 10:
        raise ValueError(f"political score must be in -10..10, got {score}")
    return (score + 10) / 20


def normalize_monetary(score: int) -> float:
    """Map the 0..10 paid-content likelihood to a unit score (0 is best)."""
    if not 0 <= score <= 10:
        raise ValueError(f"monetary score must be in 0..10, got {score}")
    return 1.0 - score / 10


def validate_weights(weights: Sequence[float]) -> Tuple[float, float, float, float, float]:
    """Check a custom weight vector: five non-negative entries summing to 1."""
    if len(weights) != 5:
        raise ValueError(f"expected 5 weights, got {len(weights)}")
    if any(w < 0 for w in weights):
        raise ValueError(f"weights must be non-negative, got {tuple(weights)}")
    total = sum(weights)
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        raise ValueError(f"weights must sum to 1, got {total!r}")
    return tuple(float(w) for w in weights)  # type: ignore[return-value]


def aggregate_confidence(
    raw: RawScores,
    weights: Optional[Sequence[float]] = None,
    *,
    political_normalizer: Callable[[int], float] = normalize_political,
) -> ConfidenceBreakdown:
    """Normalize the five raw signals and combine them into one confidence.

    The confidence is the dot product of the weight vector and the
    normalized components; the default weights put half the mass on the
    self-assessment and nearly a third on the hallucination signal.
    """
    w = DEFAULT_WEIGHTS if weights is None else validate_weights(weights)
    components = (
        normalize_sources(raw.source_count),
        normalize_self_assessment(raw.self_assessment),
        political_normalizer(raw.political),
        normalize_monetary(raw.monetary),
        normalize_hallucinations(raw.hallucination_count),
    )
    confidence = sum(wi * ci for wi, ci in zip(w, components))
    return ConfidenceBreakdown(
        norm_sources=components[0],
        norm_self=components[1],
        norm_political=components[2],
        norm_monetary=components[3],
        norm_hallucination=components[4],
        confidence=confidence,
        weights=w,
    )
