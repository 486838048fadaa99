"""The five-request verification flow.

One initial chat completion produces the answer; four follow-up requests
then assess it independently (supporting sources, monetary/political
disclosure, an independent fact-check, and a self-assessment), all at
temperature 0. Cited URLs are liveness-checked, fact-check findings are
anchored into the answer text, and everything is aggregated into a
weighted confidence score.

A failed assessment stage never kills the chat turn: the stage falls back
to a conservative-neutral default and is listed in ``degraded_stages`` so
the UI can flag it.
"""
from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from chatcheck.highlight import AnchoredSpan, DEFAULT_FUZZY_THRESHOLD, locate_all
from chatcheck.providers import ChatMessage, ChatRequest
from chatcheck.scoring import ConfidenceBreakdown, RawScores, aggregate_confidence
from chatcheck.sources import (
    DEFAULT_PARALLELISM,
    DEFAULT_TIMEOUT,
    ValidationResult,
    filter_valid,
    validate_all,
)
from chatcheck.structured import ParseFailure, parse_structured

STAGE_SOURCES = "sources"
STAGE_DISCLOSURE = "disclosure"
STAGE_FACTCHECK = "factcheck"
STAGE_SELF = "self_assessment"
ALL_STAGES = (STAGE_SOURCES, STAGE_DISCLOSURE, STAGE_FACTCHECK, STAGE_SELF)

FACTUAL_ERROR = "factual_error"
SUBJECTIVE_STATEMENT = "subjective_statement"

_URL_RE = re.compile(r"https?://[^\s<>\"')\]]+")
_SCORE_FRACTION_RE = re.compile(r"(\d{1,3})\s*/\s*100")
_BARE_INT_RE = re.compile(r"-?\d{1,3}")

DEFAULT_PROMPT_DIR = Path(__file__).parent / "prompts"


@dataclass(frozen=True)
class HallucinationFinding:
    """One fact-check finding: a supposedly verbatim quote plus why it was
    flagged. ``anchor`` is filled by the highlighter when the quote can be
    located in the answer."""

    quote: str
    explanation: str
    kind: str  # factual_error | subjective_statement
    anchor: Optional[AnchoredSpan] = None

    def __post_init__(self) -> None:
        if not self.quote:
            raise ValueError("finding quote must be non-empty")
        if self.kind not in (FACTUAL_ERROR, SUBJECTIVE_STATEMENT):
            raise ValueError(f"unknown finding kind {self.kind!r}")


@dataclass(frozen=True)
class DisclosureAssessment:
    monetary: int  # 0..10
    monetary_explanation: str
    political: int  # -10..10
    political_explanation: str

    def __post_init__(self) -> None:
        if not 0 <= self.monetary <= 10:
            raise ValueError(f"monetary must be in 0..10, got {self.monetary}")
        if not -10 <= self.political <= 10:
            raise ValueError(f"political must be in -10..10, got {self.political}")


NEUTRAL_DISCLOSURE = DisclosureAssessment(0, "", 0, "")


@dataclass(frozen=True)
class SelfAssessment:
    score: int  # 0..100
    explanation: str

    def __post_init__(self) -> None:
        if not 0 <= self.score <= 100:
            raise ValueError(f"self-assessment score must be in 0..100, got {self.score}")


# Maximally uninformative midpoint, used when the stage degrades.
FALLBACK_SELF = SelfAssessment(50, "")


@dataclass
class VerifiedResponse:
    """One verified chat turn: the answer plus everything needed to judge it."""

    query: str
    answer: str
    validated_sources: List[str]
    disclosure: DisclosureAssessment
    findings: List[HallucinationFinding]
    self_assessment: SelfAssessment
    breakdown: ConfidenceBreakdown
    degraded_stages: Tuple[str, ...] = ()
    warnings: Tuple[str, ...] = ()
    template_version: str = "unversioned"

    def raw_scores(self) -> RawScores:
        return RawScores(
            source_count=len(self.validated_sources),
            hallucination_count=len(self.findings),
            self_assessment=self.self_assessment.score,
            political=self.disclosure.political,
            monetary=self.disclosure.monetary,
        )

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "answer": self.answer,
            "validated_sources": list(self.validated_sources),
            "disclosure": {
                "monetary": self.disclosure.monetary,
                "monetary_explanation": self.disclosure.monetary_explanation,
                "political": self.disclosure.political,
                "political_explanation": self.disclosure.political_explanation,
            },
            "findings": [
                {
                    "quote": f.quote,
                    "explanation": f.explanation,
                    "kind": f.kind,
                    "anchor": (
                        {
                            "start": f.anchor.start,
                            "end": f.anchor.end,
                            "match_quality": f.anchor.match_quality,
                        }
                        if f.anchor
                        else None
                    ),
                }
                for f in self.findings
            ],
            "self_assessment": {
                "score": self.self_assessment.score,
                "explanation": self.self_assessment.explanation,
            },
            "breakdown": {
                "norm_sources": self.breakdown.norm_sources,
                "norm_self": self.breakdown.norm_self,
                "norm_political": self.breakdown.norm_political,
                "norm_monetary": self.breakdown.norm_monetary,
                "norm_hallucination": self.breakdown.norm_hallucination,
                "weights": list(self.breakdown.weights),
                "confidence": self.breakdown.confidence,
            },
            "degraded_stages": list(self.degraded_stages),
            "warnings": list(self.warnings),
            "template_version": self.template_version,
        }


class PromptTemplates:
    """Versioned prompt templates with {question}/{answer} placeholders.

    Placeholders are substituted literally (no str.format) because the
    templates themselves contain JSON braces.
    """

    NAMES = ALL_STAGES

    def __init__(self, directory: Optional[str] = None):
        self.directory = Path(directory) if directory else DEFAULT_PROMPT_DIR
        self._templates: Dict[str, str] = {}
        for name in self.NAMES:
            path = self.directory / f"{name}.txt"
            if not path.is_file():
                raise FileNotFoundError(f"missing prompt template {path}")
            self._templates[name] = path.read_text(encoding="utf-8")
        version_file = self.directory / "VERSION"
        self.version = (
            version_file.read_text(encoding="utf-8").strip() if version_file.is_file() else "unversioned"
        )

    def render(self, name: str, question: str, answer: str) -> str:
        template = self._templates[name]
        return template.replace("{question}", question).replace("{answer}", answer)


@dataclass
class PipelineConfig:
    model: str = "gpt-3.5-turbo"
    weights: Optional[Tuple[float, float, float, float, float]] = None
    initial_temperature: Optional[float] = None  # None = provider default
    assessment_temperature: float = 0.0  # factual stages stay at 0
    stage_parallelism: int = 4
    source_timeout: float = DEFAULT_TIMEOUT
    source_parallelism: int = DEFAULT_PARALLELISM
    follow_redirects: bool = True
    fuzzy_threshold: float = DEFAULT_FUZZY_THRESHOLD
    template_dir: Optional[str] = None


class Pipeline:
    """Runs the verification flow against any provider with ``complete()``.

    ``validator`` maps a list of candidate URLs to ValidationResults;
    the default wraps :func:`chatcheck.sources.validate_all` with the
    configured timeout and parallelism.
    """

    def __init__(
        self,
        provider,
        validator: Optional[Callable[[List[str]], List[ValidationResult]]] = None,
        config: Optional[PipelineConfig] = None,
    ):
        self.provider = provider
        self.config = config or PipelineConfig()
        self.templates = PromptTemplates(self.config.template_dir)
        if validator is None:
            cfg = self.config
            validator = lambda urls: validate_all(  # noqa: E731
                urls,
                timeout=cfg.source_timeout,
                parallelism=cfg.source_parallelism,
                follow_redirects=cfg.follow_redirects,
            )
        self.validator = validator

    # -- individual requests ------------------------------------------------

    def generate_initial(self, history: Sequence[ChatMessage], query: str) -> str:
        """The answer to verify; provider failures here are fatal."""
        if not query or not query.strip():
            raise ValueError("query must be non-empty")
        messages = tuple(history) + (ChatMessage("user", query),)
        request = ChatRequest(
            model=self.config.model,
            messages=messages,
            temperature=self.config.initial_temperature,
        )
        return self.provider.complete(request)

    def _assess(self, stage: str, question: str, answer: str) -> str:
        prompt = self.templates.render(stage, question, answer)
        request = ChatRequest(
            model=self.config.model,
            messages=(ChatMessage("user", prompt),),
            temperature=self.config.assessment_temperature,
        )
        return self.provider.complete(request)

    def request_sources(self, query: str, answer: str) -> List[str]:
        """Candidate source URLs named by the model, deduplicated in order."""
        reply = self._assess(STAGE_SOURCES, query, answer)
        urls = [u.rstrip(".,;:!?") for u in _URL_RE.findall(reply)]
        return list(dict.fromkeys(u for u in urls if u))

    def request_disclosure(self, query: str, answer: str) -> Tuple[DisclosureAssessment, List[str]]:
        """Monetary/political ratings, clamped into range with warnings."""
        reply = self._assess(STAGE_DISCLOSURE, query, answer)
        value = parse_structured(reply, schema={"monetary": int, "political": int})
        warnings: List[str] = []
        monetary = _clamp(value["monetary"], 0, 10, "monetary", warnings)
        political = _clamp(value["political"], -10, 10, "political", warnings)
        assessment = DisclosureAssessment(
            monetary=monetary,
            monetary_explanation=str(value.get("monetary_explanation", "")),
            political=political,
            political_explanation=str(value.get("political_explanation", "")),
        )
        return assessment, warnings

    def request_factcheck(self, query: str, answer: str) -> List[HallucinationFinding]:
        """Fact-check findings; the findings list is authoritative for counts."""
        reply = self._assess(STAGE_FACTCHECK, query, answer)
        value = parse_structured(reply, schema={"findings": list})
        findings: List[HallucinationFinding] = []
        for item in value["findings"]:
            if not isinstance(item, dict):
                continue
            quote = str(item.get("quote", "") or "").strip()
            if not quote:
                continue
            findings.append(
                HallucinationFinding(
                    quote=quote,
                    explanation=str(item.get("explanation", "") or ""),
                    kind=_normalize_kind(str(item.get("kind", "") or "")),
                )
            )
        return findings

    def request_self_assessment(self, query: str, answer: str) -> Tuple[SelfAssessment, List[str]]:
        """The model's own 0..100 accuracy rating, clamped with warnings."""
        reply = self._assess(STAGE_SELF, query, answer)
        warnings: List[str] = []
        try:
            value = parse_structured(reply, schema={"score": int})
            score = value["score"]
            explanation = str(value.get("explanation", "") or "")
        except ParseFailure:
            extracted = _extract_score(reply)
            if extracted is None:
                raise
            score = extracted
            explanation = reply.strip()
            warnings.append("self_assessment: score recovered from free text")
        score = _clamp(score, 0, 100, "self-assessment score", warnings)
        return SelfAssessment(score=score, explanation=explanation), warnings

    # -- orchestration ------------------------------------------------------

    def verify(self, history: Sequence[ChatMessage], query: str) -> VerifiedResponse:
        """Full flow: initial answer, concurrent assessments, URL
        validation, finding anchoring, score aggregation."""
        answer = self.generate_initial(history, query)

        def sources_stage() -> List[str]:
            candidates = self.request_sources(query, answer)
            return filter_valid(self.validator(candidates))

        with ThreadPoolExecutor(max_workers=self.config.stage_parallelism) as pool:
            futures = {
                STAGE_SOURCES: pool.submit(sources_stage),
                STAGE_DISCLOSURE: pool.submit(self.request_disclosure, query, answer),
                STAGE_FACTCHECK: pool.submit(self.request_factcheck, query, answer),
                STAGE_SELF: pool.submit(self.request_self_assessment, query, answer),
            }
            outcomes = {}
            failures = {}
            for stage, future in futures.items():
                try:
                    outcomes[stage] = future.result()
                except Exception as exc:  # stage isolation: one bad stage never kills the turn
                    failures[stage] = exc

        degraded: List[str] = []
        warnings: List[str] = []

        if STAGE_SOURCES in outcomes:
            validated_sources = outcomes[STAGE_SOURCES]
        else:
            validated_sources = []
            degraded.append(STAGE_SOURCES)

        if STAGE_DISCLOSURE in outcomes:
            disclosure, stage_warnings = outcomes[STAGE_DISCLOSURE]
            warnings.extend(stage_warnings)
        else:
            disclosure = NEUTRAL_DISCLOSURE
            degraded.append(STAGE_DISCLOSURE)

        if STAGE_FACTCHECK in outcomes:
            findings = outcomes[STAGE_FACTCHECK]
        else:
            findings = []
            degraded.append(STAGE_FACTCHECK)

        if STAGE_SELF in outcomes:
            self_assessment, stage_warnings = outcomes[STAGE_SELF]
            warnings.extend(stage_warnings)
        else:
            self_assessment = FALLBACK_SELF
            degraded.append(STAGE_SELF)

        for stage, exc in failures.items():
            warnings.append(f"{stage} degraded: {exc}")

        findings = locate_all(answer, findings, fuzzy_threshold=self.config.fuzzy_threshold)

        raw = RawScores(
            source_count=len(validated_sources),
            hallucination_count=len(findings),
            self_assessment=self_assessment.score,
            political=disclosure.political,
            monetary=disclosure.monetary,
        )
        breakdown = aggregate_confidence(raw, weights=self.config.weights)

        return VerifiedResponse(
            query=query,
            answer=answer,
            validated_sources=validated_sources,
            disclosure=disclosure,
            findings=findings,
            self_assessment=self_assessment,
            breakdown=breakdown,
            degraded_stages=tuple(sorted(degraded, key=ALL_STAGES.index)),
            warnings=tuple(warnings),
            template_version=self.templates.version,
        )


def _clamp(value: int, low: int, high: int, label: str, warnings: List[str]) -> int:
    if value < low:
        warnings.append(f"{label} {value} clamped to {low}")
        return low
    if value > high:
        warnings.append(f"{label} {value} clamped to {high}")
        return high
    return value


def _normalize_kind(kind: str) -> str:
    lowered = kind.strip().lower()
    if "subject" in lowered:
        return SUBJECTIVE_STATEMENT
    return FACTUAL_ERROR


def _extract_score(text: str) -> Optional[int]:
    match = _SCORE_FRACTION_RE.search(text)
    if match:
        value = int(match.group(1))
        if 0 <= value <= 100:
            return value
    for match in _BARE_INT_RE.finditer(text):
        value = int(match.group())
        if 0 <= value <= 100:
            return value
    return None
