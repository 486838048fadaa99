from __future__ import annotations

import json

import pytest

from chatcheck.pipeline import (
    FALLBACK_SELF,
    NEUTRAL_DISCLOSURE,
    DisclosureAssessment,
    HallucinationFinding,
    SelfAssessment,
)
from chatcheck.providers import ChatMessage, ScriptedProvider, UnscriptedRequest
from chatcheck.scoring import aggregate_confidence

from helpers import HAPPY, TEMPLATES, all_dead, make_pipeline, scripted


def test_happy_path_confidence():
    provider = scripted("What is water made of?", "Water is H2O.", **HAPPY)
    response = make_pipeline(provider).verify((), "What is water made of?")
    # 0.1*0.5 + 0.5*0.9 + 0.05 + 0.05 + 0.3, evaluated by hand
    assert response.breakdown.confidence == pytest.approx(0.90, abs=1e-9)
    assert response.validated_sources == ["https://example.org/reference"]
    assert response.degraded_stages == ()
    assert response.template_version == TEMPLATES.version


def test_all_stages_degraded_uses_neutral_defaults():
    provider = scripted("q?", "an answer")  # nothing but the initial reply scripted
    response = make_pipeline(provider).verify((), "q?")
    # 0 + 0.5*0.5 + 0.05 + 0.05 + 0.3, evaluated by hand
    assert response.breakdown.confidence == pytest.approx(0.65, abs=1e-9)
    assert set(response.degraded_stages) == {"sources", "disclosure", "factcheck", "self_assessment"}
    assert response.disclosure == NEUTRAL_DISCLOSURE
    assert response.self_assessment == FALLBACK_SELF
    assert response.findings == []


def test_single_stage_failure_is_isolated():
    kwargs = dict(HAPPY)
    kwargs.pop("factcheck_reply")
    provider = scripted("q?", "an answer", **kwargs)
    response = make_pipeline(provider).verify((), "q?")
    assert response.degraded_stages == ("factcheck",)
    assert response.validated_sources == ["https://example.org/reference"]
    assert response.self_assessment.score == 90


def test_initial_failure_is_fatal():
    with pytest.raises(UnscriptedRequest):
        make_pipeline(ScriptedProvider()).verify((), "anything")


def test_crashing_validator_degrades_sources_only():
    def broken_validator(urls):
        raise RuntimeError("validator blew up")

    provider = scripted("q?", "an answer", **HAPPY)
    response = make_pipeline(provider, validator=broken_validator).verify((), "q?")
    assert response.degraded_stages == ("sources",)
    assert response.self_assessment.score == 90
    assert any("validator blew up" in w for w in response.warnings)


def test_empty_query_rejected():
    provider = scripted("q?", "a")
    with pytest.raises(ValueError):
        make_pipeline(provider).verify((), "   ")


def test_breakdown_consistency():
    provider = scripted(
        "q?",
        "Sentence one. Sentence two is wrong.",
        sources_reply="1. https://a.example/x\n2. https://b.example/y",
        disclosure_reply='{"monetary": 3, "monetary_explanation": "ads", "political": -2, "political_explanation": "slight"}',
        factcheck_reply=json.dumps(
            {
                "errors": 1,
                "subjective": 0,
                "findings": [
                    {"quote": "Sentence two is wrong.", "kind": "factual_error", "explanation": "no"}
                ],
            }
        ),
        self_reply='{"score": 62, "explanation": "meh"}',
    )
    response = make_pipeline(provider).verify((), "q?")
    recomputed = aggregate_confidence(response.raw_scores())
    assert recomputed.confidence == response.breakdown.confidence
    assert recomputed == response.breakdown


def test_determinism_under_scripted_provider():
    provider = scripted("q?", "The sky is green today.", **HAPPY)
    pipeline = make_pipeline(provider)
    first = pipeline.verify((), "q?")
    second = pipeline.verify((), "q?")
    assert first.to_dict() == second.to_dict()


def test_history_is_carried_in_full():
    history = (
        ChatMessage("user", "first question"),
        ChatMessage("assistant", "first answer"),
    )
    provider = scripted("follow-up?", "contextual answer", history=history, **HAPPY)
    response = make_pipeline(provider).verify(history, "follow-up?")
    assert response.answer == "contextual answer"


def test_findings_are_anchored():
    answer = "Paris is the capital of Italy. It rains here."
    provider = scripted(
        "q?",
        answer,
        **{
            **HAPPY,
            "factcheck_reply": json.dumps(
                {
                    "errors": 1,
                    "subjective": 1,
                    "findings": [
                        {"quote": "Paris is the capital of Italy", "kind": "factual_error", "explanation": "France"},
                        {"quote": "nothing like this appears zz qq ww", "kind": "subjective_statement", "explanation": "x"},
                    ],
                }
            ),
        },
    )
    response = make_pipeline(provider).verify((), "q?")
    anchored, unanchored = response.findings
    assert anchored.anchor is not None
    assert answer[anchored.anchor.start : anchored.anchor.end] == "Paris is the capital of Italy"
    assert unanchored.anchor is None
    # Two findings bring the hallucination component to 0.5.
    assert response.breakdown.norm_hallucination == pytest.approx(0.5)


def test_dead_sources_filtered_out():
    provider = scripted("q?", "a", **HAPPY)
    response = make_pipeline(provider, validator=all_dead).verify((), "q?")
    assert response.validated_sources == []
    assert response.breakdown.norm_sources == 0.0
    assert "sources" not in response.degraded_stages  # stage ran fine, URLs were just dead


# -- individual stage parsing ------------------------------------------------


def stage_pipeline(query, answer, **kwargs):
    provider = scripted(query, answer, **kwargs)
    return make_pipeline(provider)


def test_request_sources_numbered_list():
    p = stage_pipeline("q?", "a", sources_reply="1. https://a.example/x\n2. https://b.example/y")
    assert p.request_sources("q?", "a") == ["https://a.example/x", "https://b.example/y"]


def test_request_sources_none_available():
    p = stage_pipeline("q?", "a", sources_reply="No sources available.")
    assert p.request_sources("q?", "a") == []


def test_request_sources_deduplicates_in_order():
    reply = "https://a.example/x\nhttps://b.example/y\nhttps://a.example/x"
    p = stage_pipeline("q?", "a", sources_reply=reply)
    assert p.request_sources("q?", "a") == ["https://a.example/x", "https://b.example/y"]


def test_request_sources_strips_trailing_punctuation():
    p = stage_pipeline("q?", "a", sources_reply="See https://a.example/x, and https://b.example/y.")
    assert p.request_sources("q?", "a") == ["https://a.example/x", "https://b.example/y"]


def test_request_disclosure_neutral():
    p = stage_pipeline(
        "q?", "a",
        disclosure_reply='{"monetary": 0, "monetary_explanation": "", "political": 0, "political_explanation": ""}',
    )
    assessment, warnings = p.request_disclosure("q?", "a")
    assert assessment == DisclosureAssessment(0, "", 0, "")
    assert warnings == []


def test_request_disclosure_clamps_and_warns():
    p = stage_pipeline("q?", "a", disclosure_reply='{"monetary": 12, "political": 0}')
    assessment, warnings = p.request_disclosure("q?", "a")
    assert assessment.monetary == 10
    assert any("clamped" in w for w in warnings)


def test_request_disclosure_boundary_value_kept():
    p = stage_pipeline(
        "q?", "a",
        disclosure_reply='{"monetary": 0, "political": -10, "political_explanation": "far left framing"}',
    )
    assessment, warnings = p.request_disclosure("q?", "a")
    assert assessment.political == -10
    assert assessment.political_explanation == "far left framing"
    assert warnings == []


def test_request_factcheck_empty():
    p = stage_pipeline("q?", "a", factcheck_reply='{"errors": 0, "subjective": 0, "findings": []}')
    assert p.request_factcheck("q?", "a") == []


def test_request_factcheck_single_finding():
    reply = json.dumps(
        {
            "errors": 1,
            "subjective": 0,
            "findings": [
                {"quote": "1000 is larger than 1062", "kind": "factual_error", "explanation": "it is not"}
            ],
        }
    )
    p = stage_pipeline("q?", "a", factcheck_reply=reply)
    findings = p.request_factcheck("q?", "a")
    assert len(findings) == 1
    assert findings[0].quote == "1000 is larger than 1062"
    assert findings[0].kind == "factual_error"


def test_request_factcheck_mixed_kinds():
    reply = json.dumps(
        {
            "errors": 2,
            "subjective": 1,
            "findings": [
                {"quote": "err one", "kind": "factual_error", "explanation": ""},
                {"quote": "err two", "kind": "error", "explanation": ""},
                {"quote": "just my view", "kind": "subjective", "explanation": ""},
            ],
        }
    )
    p = stage_pipeline("q?", "a", factcheck_reply=reply)
    findings = p.request_factcheck("q?", "a")
    assert [f.kind for f in findings] == ["factual_error", "factual_error", "subjective_statement"]


def test_request_self_assessment_plain():
    p = stage_pipeline("q?", "a", self_reply='{"score": 100, "explanation": "sure"}')
    assessment, warnings = p.request_self_assessment("q?", "a")
    assert assessment.score == 100
    assert warnings == []


def test_request_self_assessment_pass_through_77():
    p = stage_pipeline("q?", "a", self_reply='{"score": 77, "explanation": "fairly sure"}')
    assessment, _ = p.request_self_assessment("q?", "a")
    assert assessment.score == 77


def test_request_self_assessment_free_text_recovery():
    p = stage_pipeline("q?", "a", self_reply="I'd say about 85/100 because the dates check out.")
    assessment, warnings = p.request_self_assessment("q?", "a")
    assert assessment.score == 85
    assert any("recovered" in w for w in warnings)


def test_request_self_assessment_clamps():
    p = stage_pipeline("q?", "a", self_reply='{"score": 140, "explanation": "!"}')
    assessment, warnings = p.request_self_assessment("q?", "a")
    assert assessment.score == 100
    assert any("clamped" in w for w in warnings)


def test_finding_validation():
    with pytest.raises(ValueError):
        HallucinationFinding(quote="", explanation="", kind="factual_error")
    with pytest.raises(ValueError):
        HallucinationFinding(quote="x", explanation="", kind="vibe")
    with pytest.raises(ValueError):
        DisclosureAssessment(11, "", 0, "")
    with pytest.raises(ValueError):
        SelfAssessment(101, "")


def test_to_dict_shape():
    provider = scripted("q?", "a", **HAPPY)
    data = make_pipeline(provider).verify((), "q?").to_dict()
    assert data["breakdown"]["confidence"] == pytest.approx(0.9, abs=1e-9)
    assert data["breakdown"]["weights"] == [0.1, 0.5, 0.05, 0.05, 0.3]
    assert data["validated_sources"] == ["https://example.org/reference"]
    assert data["degraded_stages"] == []
    json.dumps(data)  # JSON-serializable end to end
