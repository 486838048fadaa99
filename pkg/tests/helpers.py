"""Shared test helpers: scripted pipelines without any network."""
from __future__ import annotations

from chatcheck.pipeline import Pipeline, PipelineConfig, PromptTemplates
from chatcheck.providers import ChatMessage, ChatRequest, ScriptedProvider
from chatcheck.sources import ValidationResult

MODEL = "test-model"

TEMPLATES = PromptTemplates()

HAPPY = dict(
    sources_reply="https://example.org/reference",
    disclosure_reply='{"monetary": 0, "monetary_explanation": "none", "political": 0, "political_explanation": "neutral"}',
    factcheck_reply='{"errors": 0, "subjective": 0, "findings": []}',
    self_reply='{"score": 90, "explanation": "solid"}',
)


def all_valid(urls):
    return [ValidationResult(u, "valid", 200, 0.0) for u in urls]


def all_dead(urls):
    return [ValidationResult(u, "invalid", 404, 0.0) for u in urls]


def scripted(
    query: str,
    answer: str,
    *,
    sources_reply: str | None = None,
    disclosure_reply: str | None = None,
    factcheck_reply: str | None = None,
    self_reply: str | None = None,
    history: tuple[ChatMessage, ...] = (),
    provider: ScriptedProvider | None = None,
) -> ScriptedProvider:
    """Build/extend a transcript covering the initial request plus any
    scripted assessment stages; stages left as None degrade."""
    if provider is None:
        provider = ScriptedProvider()
    initial = ChatRequest(MODEL, history + (ChatMessage("user", query),), None)
    provider.script(initial, answer)
    for stage, reply in (
        ("sources", sources_reply),
        ("disclosure", disclosure_reply),
        ("factcheck", factcheck_reply),
        ("self_assessment", self_reply),
    ):
        if reply is not None:
            prompt = TEMPLATES.render(stage, query, answer)
            provider.script(ChatRequest(MODEL, (ChatMessage("user", prompt),), 0.0), reply)
    return provider


def make_pipeline(provider, validator=all_valid, **config_overrides) -> Pipeline:
    config = PipelineConfig(model=MODEL, **config_overrides)
    return Pipeline(provider, validator=validator, config=config)
