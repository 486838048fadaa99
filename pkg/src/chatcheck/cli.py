"""Command line interface: serve the HTTP API, ask one-off questions,
run the QA evaluation harness, or replay recorded transcripts offline."""
from __future__ import annotations

import functools
import json
import os
import sys
import time
from typing import Optional

import click

from chatcheck.config import AppConfig, ConfigError, build_pipeline, load_config
from chatcheck.pipeline import VerifiedResponse
from chatcheck.providers import ChatMessage, ProviderError
from chatcheck.qa_eval import (
    InsufficientData,
    SchemaError,
    load_labels,
    load_squad,
    metrics,
    run_eval,
    sample_questions,
    write_report,
)

EXIT_CONFIG = 2
EXIT_PROVIDER = 3
EXIT_DATA = 4


def exit_coded(fn):
    """Map failure categories onto distinct exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"configuration error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except ProviderError as exc:
            click.echo(f"provider error: {exc}", err=True)
            sys.exit(EXIT_PROVIDER)
        except (SchemaError, InsufficientData, IOError) as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(EXIT_DATA)

    return wrapper


@click.group()
def main():
    """Verified chat: answers with confidence scores, sources, and
    highlighted fact-check findings."""


def _config_from(config_file: Optional[str], **overrides) -> AppConfig:
    return load_config(config_file, overrides=overrides)


def format_human(response: VerifiedResponse) -> str:
    lines = ["Answer:", response.answer, ""]
    percent = round(response.breakdown.confidence * 100)
    breakdown = response.breakdown
    lines.append(
        f"Confidence: {percent}% (sources {breakdown.norm_sources:.2f}, "
        f"self {breakdown.norm_self:.2f}, political {breakdown.norm_political:.2f}, "
        f"monetary {breakdown.norm_monetary:.2f}, hallucinations {breakdown.norm_hallucination:.2f})"
    )
    lines.append(
        f"Self-assessment: {response.self_assessment.score}/100"
        + (f" - {response.self_assessment.explanation}" if response.self_assessment.explanation else "")
    )
    if response.validated_sources:
        lines.append("Validated sources:")
        lines.extend(f"  {i}. {url}" for i, url in enumerate(response.validated_sources, 1))
    else:
        lines.append("Validated sources: none")
    if response.findings:
        lines.append(f"Findings ({len(response.findings)}):")
        for finding in response.findings:
            marker = "?" if finding.anchor is None else "!"
            lines.append(f"  {marker} [{finding.kind}] \"{finding.quote}\" - {finding.explanation}")
    else:
        lines.append("Findings: none")
    if response.degraded_stages:
        lines.append("Degraded stages: " + ", ".join(response.degraded_stages))
    return "\n".join(lines)


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--config", "config_file", type=click.Path(exists=True), default=None)
@click.option("--transcript", type=click.Path(exists=True), default=None,
              help="Serve offline, replaying a recorded transcript.")
@click.option("--persist", type=click.Path(), default=None,
              help="JSON file for durable session storage.")
@click.option("--ui-dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Directory of built UI assets to serve at /.")
@exit_coded
def serve(port, host, config_file, transcript, persist, ui_dir):
    """Run the HTTP API (and optionally the web UI)."""
    import uvicorn

    from chatcheck.service import SessionStore, create_app

    config = _config_from(config_file, transcript=transcript, persist_path=persist, ui_dir=ui_dir)
    pipeline = build_pipeline(config)
    app = create_app(
        pipeline,
        store=SessionStore(config.persist_path),
        cors_origins=config.cors_origins,
        ui_dir=config.ui_dir,
    )
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.argument("question")
@click.option("--json", "as_json", is_flag=True, help="Print one JSON document.")
@click.option("--config", "config_file", type=click.Path(exists=True), default=None)
@click.option("--transcript", type=click.Path(exists=True), default=None)
@exit_coded
def ask(question, as_json, config_file, transcript):
    """Ask one question and print the verified answer."""
    config = _config_from(config_file, transcript=transcript)
    pipeline = build_pipeline(config)
    response = pipeline.verify((), question)
    if as_json:
        click.echo(json.dumps(response.to_dict(), indent=2, sort_keys=True, ensure_ascii=False))
    else:
        click.echo(format_human(response))


@main.command(name="eval")
@click.option("--squad", "squad_path", required=True, type=click.Path(exists=True),
              help="SQuAD 2.0 JSON file.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--categories", default=16, show_default=True, type=int)
@click.option("--per-class", default=4, show_default=True, type=int)
@click.option("--labels", "labels_path", type=click.Path(exists=True), default=None,
              help="Manual labels CSV (id,correct).")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--transcript", type=click.Path(exists=True), default=None)
@click.option("--parallelism", default=2, show_default=True, type=int)
@click.option("--rate", default=None, type=float, help="Max pipeline runs per second.")
@click.option("--config", "config_file", type=click.Path(exists=True), default=None)
@exit_coded
def eval_command(squad_path, seed, categories, per_class, labels_path, out_dir,
                 transcript, parallelism, rate, config_file):
    """Sample questions, run the pipeline on each, and write reports."""
    config = _config_from(config_file, transcript=transcript)
    pipeline = build_pipeline(config)

    records = load_squad(squad_path)
    questions = sample_questions(records, seed=seed, categories=categories, per_class=per_class)
    labels = load_labels(labels_path) if labels_path else None

    run_dir = os.path.join(out_dir, f"run-{time.strftime('%Y%m%d-%H%M%S')}-seed{seed}")
    suffix = 2
    while os.path.exists(run_dir):
        run_dir = os.path.join(out_dir, f"run-{time.strftime('%Y%m%d-%H%M%S')}-seed{seed}-{suffix}")
        suffix += 1
    os.makedirs(run_dir)

    outcomes = run_eval(
        pipeline,
        questions,
        parallelism=parallelism,
        outcomes_path=os.path.join(run_dir, "outcomes.jsonl"),
        labels=labels,
        rate=rate,
    )
    report = write_report(
        run_dir,
        outcomes,
        parameters={
            "seed": seed,
            "categories": categories,
            "per_class": per_class,
            "squad": os.path.basename(squad_path),
        },
    )

    click.echo(f"run directory: {run_dir}")
    click.echo(f"questions: {report['counts']['questions']} "
               f"({report['counts']['answerable']} answerable / "
               f"{report['counts']['unanswerable']} unanswerable)")
    if "metrics" in report:
        for stratum, values in report["metrics"].items():
            parts = [
                f"{name} {'undefined' if values[name] is None else format(values[name] * 100, '.1f') + '%'}"
                for name in ("accuracy", "recall", "precision")
            ]
            click.echo(f"{stratum}: " + ", ".join(parts))
    else:
        click.echo(f"unresolved outcomes: {len(report['unresolved_ids'])} "
                   "(provide --labels to finish judging)")


@main.command()
@click.option("--transcript", required=True, type=click.Path(exists=True))
@click.option("--question", default=None, help="One-shot question; otherwise read stdin lines.")
@click.option("--json", "as_json", is_flag=True)
@exit_coded
def replay(transcript, question, as_json):
    """Replay a recorded transcript offline (no network, no key)."""
    config = _config_from(None, transcript=transcript)
    pipeline = build_pipeline(config)

    def show(response: VerifiedResponse) -> None:
        if as_json:
            click.echo(json.dumps(response.to_dict(), indent=2, sort_keys=True, ensure_ascii=False))
        else:
            click.echo(format_human(response))

    if question is not None:
        show(pipeline.verify((), question))
        return

    history: tuple = ()
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        response = pipeline.verify(history, line)
        show(response)
        history = history + (ChatMessage("user", line), ChatMessage("assistant", response.answer))


if __name__ == "__main__":
    main()
