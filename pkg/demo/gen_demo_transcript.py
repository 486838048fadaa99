"""Regenerates demo/transcript.json, a small canned conversation for
running the service and UI fully offline:

    python3 demo/gen_demo_transcript.py
    chatcheck serve --transcript demo/transcript.json
"""
from __future__ import annotations

import json
from pathlib import Path

from chatcheck.pipeline import PipelineConfig, PromptTemplates
from chatcheck.providers import fingerprint

HERE = Path(__file__).parent

SKY_ANSWER = (
    "The sky looks blue because of Rayleigh scattering: air molecules scatter "
    "short blue wavelengths of sunlight far more strongly than red ones. "
    "Incidentally, the sky is blue only on Earth, and sunsets are red because "
    "the blue light is entirely absorbed by the ground. Everyone agrees the "
    "effect is most beautiful in autumn."
)

TOWER_ANSWER = (
    "The Eiffel Tower is about 330 metres tall including antennas, and it "
    "was the tallest structure in the world until 1930. It grows roughly "
    "15 centimetres in summer because the iron expands in the heat."
)

CONVERSATION = [
    {
        "question": "What makes the sky blue?",
        "answer": SKY_ANSWER,
        "history": [],
        "sources": (
            "1. https://en.wikipedia.org/wiki/Rayleigh_scattering\n"
            "2. https://en.wikipedia.org/wiki/Diffuse_sky_radiation"
        ),
        "disclosure": json.dumps(
            {
                "monetary": 0,
                "monetary_explanation": "No products or paid placements appear in the answer.",
                "political": 0,
                "political_explanation": "Atmospheric optics has no political leaning.",
            }
        ),
        "factcheck": json.dumps(
            {
                "errors": 1,
                "subjective": 1,
                "findings": [
                    {
                        "quote": "sunsets are red because the blue light is entirely absorbed by the ground",
                        "kind": "factual_error",
                        "explanation": "Sunset reddening comes from scattering along a longer air path, not absorption by the ground.",
                    },
                    {
                        "quote": "Everyone agrees the effect is most beautiful in autumn",
                        "kind": "subjective_statement",
                        "explanation": "An aesthetic claim presented as universal fact.",
                    },
                ],
            }
        ),
        "self_assessment": json.dumps(
            {
                "score": 74,
                "explanation": "The scattering mechanism is right; some embellishments are shaky.",
            }
        ),
    },
    {
        "question": "How tall is the Eiffel Tower?",
        "answer": TOWER_ANSWER,
        "history": [
            ("user", "What makes the sky blue?"),
            ("assistant", SKY_ANSWER),
        ],
        "sources": "1. https://en.wikipedia.org/wiki/Eiffel_Tower",
        "disclosure": json.dumps(
            {
                "monetary": 2,
                "monetary_explanation": "Mentions a tourist attraction, but without promotional framing.",
                "political": 0,
                "political_explanation": "Neutral.",
            }
        ),
        "factcheck": json.dumps({"errors": 0, "subjective": 0, "findings": []}),
        "self_assessment": json.dumps(
            {"score": 92, "explanation": "Well-documented figures."}
        ),
    },
]


def build_entries() -> list[dict]:
    config = PipelineConfig()
    templates = PromptTemplates()
    entries = []
    for turn in CONVERSATION:
        question, answer = turn["question"], turn["answer"]
        contents = [content for _, content in turn["history"]] + [question]
        entries.append(
            {
                "fingerprint": fingerprint(config.model, config.initial_temperature, contents),
                "request_summary": f"initial: {question}",
                "reply": answer,
            }
        )
        for stage in ("sources", "disclosure", "factcheck", "self_assessment"):
            prompt = templates.render(stage, question, answer)
            entries.append(
                {
                    "fingerprint": fingerprint(config.model, config.assessment_temperature, [prompt]),
                    "request_summary": f"{stage}: {question}",
                    "reply": turn[stage],
                }
            )
    return entries


def main() -> None:
    out = HERE / "transcript.json"
    with open(out, "w", encoding="utf-8") as fp:
        json.dump(build_entries(), fp, indent=2, ensure_ascii=False)
        fp.write("\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
