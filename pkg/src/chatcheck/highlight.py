"""Anchoring fact-check quotes to character spans of the answer text.

The fact-check stage returns quotes that are supposed to be verbatim, but
models routinely change case, whitespace, or a couple of words. Matching
runs in three tiers: exact substring, case/whitespace-normalized match
mapped back to original offsets, then a fuzzy token-overlap window. All
offsets are Unicode code-point indices into the answer.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, TypeVar

EXACT = "exact"
NORMALIZED = "normalized"
FUZZY = "fuzzy"

# Minimum token-overlap ratio for the fuzzy tier; lightly paraphrased
# quotes anchor, heavily mutated ones fall through to "not locatable".
DEFAULT_FUZZY_THRESHOLD = 0.8

_WORD_RE = re.compile(r"\w+", re.UNICODE)


@dataclass(frozen=True)
class AnchoredSpan:
    start: int
    end: int
    match_quality: str  # exact | normalized | fuzzy

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")
        if self.match_quality not in (EXACT, NORMALIZED, FUZZY):
            raise ValueError(f"unknown match quality {self.match_quality!r}")


def _normalize(text: str) -> str:
    out: List[str] = []
    pending_space = False
    for ch in text:
        if ch.isspace():
            pending_space = True
            continue
        if pending_space and out:
            out.append(" ")
        pending_space = False
        out.extend(ch.lower())
    return "".join(out)


def _normalize_with_map(text: str) -> tuple[str, List[int]]:
    """Normalized text plus, per emitted character, the source offset."""
    out: List[str] = []
    positions: List[int] = []
    pending_space = False
    for i, ch in enumerate(text):
        if ch.isspace():
            pending_space = True
            continue
        if pending_space and out:
            out.append(" ")
            positions.append(i)
        pending_space = False
        for low in ch.lower():
            out.append(low)
            positions.append(i)
    return "".join(out), positions


def _fuzzy_window(
    answer: str, quote: str, threshold: float
) -> Optional[AnchoredSpan]:
    quote_tokens = [t.lower() for t in _WORD_RE.findall(quote)]
    if not quote_tokens:
        return None
    answer_tokens = [(m.start(), m.end(), m.group().lower()) for m in _WORD_RE.finditer(answer)]
    if not answer_tokens:
        return None

    n = min(len(quote_tokens), len(answer_tokens))
    best_ratio = -1.0
    best_start = 0
    for k in range(len(answer_tokens) - n + 1):
        window = [tok for _, _, tok in answer_tokens[k : k + n]]
        remaining = list(quote_tokens)
        hits = 0
        for tok in window:
            if tok in remaining:
                remaining.remove(tok)
                hits += 1
        ratio = hits / len(quote_tokens)
        if ratio > best_ratio:
            best_ratio = ratio
            best_start = k
    if best_ratio < threshold:
        return None
    start = answer_tokens[best_start][0]
    end = answer_tokens[best_start + n - 1][1]
    return AnchoredSpan(start, end, FUZZY)


def locate(
    answer: str,
    quote: str,
    *,
    fuzzy_threshold: float = DEFAULT_FUZZY_THRESHOLD,
) -> Optional[AnchoredSpan]:
    """Find the span of ``quote`` inside ``answer``, or None.

    Exact substring wins; otherwise a case/whitespace-insensitive match is
    mapped back to original offsets; otherwise the best token-overlap
    window is taken when its overlap reaches ``fuzzy_threshold``.
    """
    if not quote or not quote.strip() or not answer:
        return None

    idx = answer.find(quote)
    if idx >= 0:
        return AnchoredSpan(idx, idx + len(quote), EXACT)

    norm_answer, positions = _normalize_with_map(answer)
    norm_quote = _normalize(quote.strip())
    if norm_quote:
        idx = norm_answer.find(norm_quote)
        if idx >= 0:
            start = positions[idx]
            end = positions[idx + len(norm_quote) - 1] + 1
            return AnchoredSpan(start, end, NORMALIZED)

    return _fuzzy_window(answer, quote, fuzzy_threshold)


FindingT = TypeVar("FindingT")


def locate_all(
    answer: str,
    findings: Iterable[FindingT],
    *,
    fuzzy_threshold: float = DEFAULT_FUZZY_THRESHOLD,
) -> List[FindingT]:
    """Anchor each finding's quote independently; unanchorable findings
    keep ``anchor=None`` so the UI can list them without inline marks.

    Findings must be dataclass instances carrying ``quote`` and ``anchor``
    fields. Idempotent: anchoring an already anchored list recomputes the
    same spans.
    """
    return [
        replace(f, anchor=locate(answer, f.quote, fuzzy_threshold=fuzzy_threshold))  # type: ignore[arg-type]
        for f in findings
    ]
