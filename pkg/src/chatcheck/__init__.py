"""chatcheck: verification middleware for LLM chat answers.

Every answer from a chat model is put through follow-up assessment
requests (supporting sources, monetary/political disclosure, independent
fact-check, self-assessment), the cited URLs are liveness-checked, the
five signals are aggregated into a weighted confidence score, and each
fact-check finding is anchored to a span of the answer for highlighting.
"""
from chatcheck.scoring import (
    DEFAULT_WEIGHTS,
    ConfidenceBreakdown,
    RawScores,
    aggregate_confidence,
    normalize_hallucinations,
    normalize_monetary,
    normalize_political,
    normalize_self_assessment,
    normalize_sources,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_WEIGHTS",
    "ConfidenceBreakdown",
    "RawScores",
    "aggregate_confidence",
    "normalize_hallucinations",
    "normalize_monetary",
    "normalize_political",
    "normalize_self_assessment",
    "normalize_sources",
    "__version__",
]
