"""Question-answering evaluation harness.

Loads SQuAD 2.0, draws a stratified sample (per category, equal counts of
answerable and unanswerable questions), runs each question through the
verification pipeline, judges answers by gold-answer containment or an
abstention lexicon (with a manual-label escape hatch), tallies 2x2
confusion matrices of hallucination-flagged x answer-correct, and reports
accuracy, precision, and recall with "answer wrong" as the positive class.

Sampling uses the Mersenne Twister from ``random.Random(seed)`` over
id-sorted candidates, so a seed reproduces the same sample on any
platform.
"""
from __future__ import annotations

import csv
import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from random import Random
from typing import Dict, List, Optional, Sequence

ABSTENTION_FILE = Path(__file__).parent / "data" / "abstention_phrases.txt"

ANSWERABLE = "answerable"
UNANSWERABLE = "unanswerable"


class SchemaError(ValueError):
    """Dataset JSON did not have the published SQuAD 2.0 shape."""


class InsufficientData(ValueError):
    """Not enough categories with the requested per-class question counts."""


class UnresolvedOutcome(ValueError):
    """Confusion tallying needs every outcome judged; some are still manual."""


@dataclass(frozen=True)
class SquadRecord:
    id: str
    category: str  # article title
    question: str
    is_answerable: bool
    gold_answers: tuple

    def __post_init__(self) -> None:
        if self.is_answerable != bool(self.gold_answers):
            raise ValueError(
                f"record {self.id}: answerable records need gold answers and vice versa"
            )


@dataclass
class EvalOutcome:
    record_id: str
    category: str
    answerable: bool
    question: str
    answer: str
    finding_count: int
    hallucination_flagged: bool
    confidence: Optional[float]
    self_score: Optional[int]
    answer_correct: Optional[bool]  # None = needs manual label
    error: Optional[str] = None

    def __post_init__(self) -> None:
        if self.hallucination_flagged != (self.finding_count > 0):
            raise ValueError("hallucination_flagged must mirror finding_count > 0")

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "category": self.category,
            "answerable": self.answerable,
            "question": self.question,
            "answer": self.answer,
            "finding_count": self.finding_count,
            "hallucination_flagged": self.hallucination_flagged,
            "confidence": self.confidence,
            "self_score": self.self_score,
            "answer_correct": self.answer_correct,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalOutcome":
        return cls(**{k: data.get(k) for k in (
            "record_id", "category", "answerable", "question", "answer",
            "finding_count", "hallucination_flagged", "confidence",
            "self_score", "answer_correct", "error",
        )})


@dataclass(frozen=True)
class ConfusionMatrix:
    correct_noflag: int
    wrong_noflag: int
    correct_flag: int
    wrong_flag: int

    def __post_init__(self) -> None:
        for cell in (self.correct_noflag, self.wrong_noflag, self.correct_flag, self.wrong_flag):
            if cell < 0:
                raise ValueError("confusion cells must be non-negative")

    @property
    def total(self) -> int:
        return self.correct_noflag + self.wrong_noflag + self.correct_flag + self.wrong_flag

    def to_dict(self) -> dict:
        return {
            "correct_noflag": self.correct_noflag,
            "wrong_noflag": self.wrong_noflag,
            "correct_flag": self.correct_flag,
            "wrong_flag": self.wrong_flag,
            "total": self.total,
        }


# -- dataset loading ---------------------------------------------------------


def load_squad(path: str) -> List[SquadRecord]:
    """Parse a SQuAD 2.0 JSON file into flat records.

    Every qa entry becomes one record; ``is_impossible`` marks a question
    unanswerable and the distinct answer texts become the gold answers.
    """
    try:
        with open(path, "r", encoding="utf-8") as fp:
            data = json.load(fp)
    except OSError as exc:
        raise IOError(f"cannot read dataset {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc

    if not isinstance(data, dict) or not isinstance(data.get("data"), list):
        raise SchemaError(f"{path}: top level must be an object with a 'data' array")

    records: List[SquadRecord] = []
    for i, article in enumerate(data["data"]):
        where = f"data[{i}]"
        if not isinstance(article, dict) or "title" not in article:
            raise SchemaError(f"{path}: {where} must be an object with 'title'")
        paragraphs = article.get("paragraphs")
        if not isinstance(paragraphs, list):
            raise SchemaError(f"{path}: {where}.paragraphs must be an array")
        for j, paragraph in enumerate(paragraphs):
            qas = paragraph.get("qas") if isinstance(paragraph, dict) else None
            if not isinstance(qas, list):
                raise SchemaError(f"{path}: {where}.paragraphs[{j}].qas must be an array")
            for k, qa in enumerate(qas):
                q_where = f"{where}.paragraphs[{j}].qas[{k}]"
                if not isinstance(qa, dict) or "id" not in qa or "question" not in qa:
                    raise SchemaError(f"{path}: {q_where} needs 'id' and 'question'")
                answers = qa.get("answers", [])
                if not isinstance(answers, list):
                    raise SchemaError(f"{path}: {q_where}.answers must be an array")
                texts = []
                for answer in answers:
                    if not isinstance(answer, dict) or "text" not in answer:
                        raise SchemaError(f"{path}: {q_where}.answers entries need 'text'")
                    if answer["text"] not in texts:
                        texts.append(answer["text"])
                is_answerable = not bool(qa.get("is_impossible", False))
                try:
                    records.append(
                        SquadRecord(
                            id=str(qa["id"]),
                            category=str(article["title"]),
                            question=str(qa["question"]),
                            is_answerable=is_answerable,
                            gold_answers=tuple(texts),
                        )
                    )
                except ValueError as exc:
                    raise SchemaError(f"{path}: {q_where}: {exc}") from exc
    return records


# -- sampling ----------------------------------------------------------------


def sample_questions(
    records: Sequence[SquadRecord],
    seed: int,
    categories: int = 16,
    per_class: int = 4,
) -> List[SquadRecord]:
    """Stratified sample: ``per_class`` answerable and ``per_class``
    unanswerable questions from each of ``categories`` categories.

    Deterministic for a given seed: categories and candidates are sorted
    before the Mersenne Twister draws.
    """
    by_category: Dict[str, Dict[bool, List[SquadRecord]]] = {}
    for record in records:
        slot = by_category.setdefault(record.category, {True: [], False: []})
        slot[record.is_answerable].append(record)

    eligible = []
    shortfalls = []
    for category in sorted(by_category):
        n_ans = len(by_category[category][True])
        n_unans = len(by_category[category][False])
        if n_ans >= per_class and n_unans >= per_class:
            eligible.append(category)
        else:
            shortfalls.append(f"{category} ({n_ans} answerable / {n_unans} unanswerable)")

    if len(eligible) < categories:
        raise InsufficientData(
            f"need {categories} categories with >= {per_class} answerable and "
            f"{per_class} unanswerable questions, found {len(eligible)}; "
            f"deficient: {', '.join(shortfalls) or 'none'}"
        )

    rng = Random(seed)
    chosen = rng.sample(eligible, categories)
    sample: List[SquadRecord] = []
    for category in chosen:
        answerable = sorted(by_category[category][True], key=lambda r: r.id)
        unanswerable = sorted(by_category[category][False], key=lambda r: r.id)
        sample.extend(rng.sample(answerable, per_class))
        sample.extend(rng.sample(unanswerable, per_class))
    return sample


# -- judging -----------------------------------------------------------------


def _normalize(text: str) -> str:
    return " ".join(text.lower().split())


def load_abstention_phrases(path: Optional[str] = None) -> List[str]:
    source = Path(path) if path else ABSTENTION_FILE
    phrases = []
    for line in source.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            phrases.append(_normalize(line))
    return phrases


_ABSTENTION_CACHE: Optional[List[str]] = None


def abstention_phrases() -> List[str]:
    global _ABSTENTION_CACHE
    if _ABSTENTION_CACHE is None:
        _ABSTENTION_CACHE = load_abstention_phrases()
    return _ABSTENTION_CACHE


def load_labels(path: str) -> Dict[str, bool]:
    """Manual labels CSV: ``id,correct`` with truthy/falsy second column."""
    truthy = {"1", "true", "yes", "correct", "t", "y"}
    falsy = {"0", "false", "no", "wrong", "f", "n"}
    labels: Dict[str, bool] = {}
    with open(path, newline="", encoding="utf-8") as fp:
        for row_number, row in enumerate(csv.reader(fp), start=1):
            if not row or (row_number == 1 and row[0].strip().lower() == "id"):
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{row_number}: expected 'id,correct'")
            value = row[1].strip().lower()
            if value in truthy:
                labels[row[0].strip()] = True
            elif value in falsy:
                labels[row[0].strip()] = False
            else:
                raise ValueError(f"{path}:{row_number}: unreadable correctness {row[1]!r}")
    return labels


def judge_answer(
    record: SquadRecord,
    answer: str,
    labels: Optional[Dict[str, bool]] = None,
) -> Optional[bool]:
    """Automatic correctness judgment with a manual override.

    Answerable: correct when any gold answer appears in the answer
    (case/whitespace-insensitive containment). Unanswerable: correct when
    the answer matches the abstention lexicon. Anything else needs a
    manual label; a label always wins.
    """
    if labels and record.id in labels:
        return labels[record.id]
    normalized = _normalize(answer)
    if record.is_answerable:
        for gold in record.gold_answers:
            gold_norm = _normalize(gold)
            if gold_norm and gold_norm in normalized:
                return True
        return None
    for phrase in abstention_phrases():
        if phrase in normalized:
            return True
    return None


# -- batch running -----------------------------------------------------------


class TokenBucket:
    """Simple token-bucket limiter: ``rate`` request starts per second."""

    def __init__(self, rate: float, capacity: Optional[float] = None):
        if rate <= 0:
            raise ValueError("rate must be > 0")
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(1.0, rate)
        self._tokens = self.capacity
        self._updated = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._updated) * self.rate)
                self._updated = now
                if self._tokens >= 1:
                    self._tokens -= 1
                    return
                wait = (1 - self._tokens) / self.rate
            time.sleep(wait)


def load_outcomes(path: str) -> List[EvalOutcome]:
    outcomes = []
    with open(path, "r", encoding="utf-8") as fp:
        for line in fp:
            line = line.strip()
            if line:
                outcomes.append(EvalOutcome.from_dict(json.loads(line)))
    return outcomes


def run_eval(
    pipeline,
    questions: Sequence[SquadRecord],
    parallelism: int = 2,
    *,
    outcomes_path: Optional[str] = None,
    labels: Optional[Dict[str, bool]] = None,
    rate: Optional[float] = None,
) -> List[EvalOutcome]:
    """Run every question through the pipeline, one outcome each.

    Outcomes are appended to ``outcomes_path`` as they complete, so a
    crashed run resumes where it stopped; when the batch finishes the file
    is rewritten in question order. Per-question failures become outcomes
    with an ``error`` marker instead of aborting the batch.
    """
    done: Dict[str, EvalOutcome] = {}
    if outcomes_path and os.path.exists(outcomes_path):
        for outcome in load_outcomes(outcomes_path):
            done[outcome.record_id] = outcome

    pending = [record for record in questions if record.id not in done]
    bucket = TokenBucket(rate) if rate else None
    write_lock = threading.Lock()

    def run_one(record: SquadRecord) -> None:
        if bucket:
            bucket.acquire()
        try:
            response = pipeline.verify((), record.question)
            outcome = EvalOutcome(
                record_id=record.id,
                category=record.category,
                answerable=record.is_answerable,
                question=record.question,
                answer=response.answer,
                finding_count=len(response.findings),
                hallucination_flagged=len(response.findings) > 0,
                confidence=response.breakdown.confidence,
                self_score=response.self_assessment.score,
                answer_correct=judge_answer(record, response.answer, labels),
            )
        except Exception as exc:
            outcome = EvalOutcome(
                record_id=record.id,
                category=record.category,
                answerable=record.is_answerable,
                question=record.question,
                answer="",
                finding_count=0,
                hallucination_flagged=False,
                confidence=None,
                self_score=None,
                answer_correct=labels.get(record.id) if labels else None,
                error=f"{type(exc).__name__}: {exc}",
            )
        with write_lock:
            done[record.id] = outcome
            if outcomes_path:
                with open(outcomes_path, "a", encoding="utf-8") as fp:
                    fp.write(json.dumps(outcome.to_dict(), ensure_ascii=False, sort_keys=True))
                    fp.write("\n")

    if pending:
        with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
            list(pool.map(run_one, pending))

    ordered = [done[record.id] for record in questions]
    if outcomes_path:
        with open(outcomes_path, "w", encoding="utf-8") as fp:
            for outcome in ordered:
                fp.write(json.dumps(outcome.to_dict(), ensure_ascii=False, sort_keys=True))
                fp.write("\n")
    return ordered


# -- tallying and metrics ----------------------------------------------------


def confusion(outcomes: Sequence[EvalOutcome]) -> Dict[str, ConfusionMatrix]:
    """2x2 tallies per stratum; every outcome must be judged first."""
    unresolved = [o.record_id for o in outcomes if o.answer_correct is None]
    if unresolved:
        raise UnresolvedOutcome(
            f"{len(unresolved)} outcome(s) still need manual labels: "
            + ", ".join(unresolved[:10])
        )
    cells = {
        ANSWERABLE: {"cn": 0, "wn": 0, "cf": 0, "wf": 0},
        UNANSWERABLE: {"cn": 0, "wn": 0, "cf": 0, "wf": 0},
    }
    for outcome in outcomes:
        stratum = ANSWERABLE if outcome.answerable else UNANSWERABLE
        key = ("c" if outcome.answer_correct else "w") + ("f" if outcome.hallucination_flagged else "n")
        cells[stratum][key] += 1
    return {
        stratum: ConfusionMatrix(
            correct_noflag=c["cn"], wrong_noflag=c["wn"], correct_flag=c["cf"], wrong_flag=c["wf"]
        )
        for stratum, c in cells.items()
    }


def metrics(matrix: ConfusionMatrix) -> Dict[str, Optional[float]]:
    """Accuracy, recall, precision with "answer wrong" as the positive
    class and "hallucination flagged" as the prediction.

    Undefined ratios (zero denominators) come back as None, never 0.
    """
    if matrix.total == 0:
        raise ValueError("confusion matrix is empty")
    accuracy = (matrix.correct_noflag + matrix.wrong_flag) / matrix.total
    recall_denominator = matrix.wrong_flag + matrix.wrong_noflag
    precision_denominator = matrix.wrong_flag + matrix.correct_flag
    return {
        "accuracy": accuracy,
        "recall": matrix.wrong_flag / recall_denominator if recall_denominator else None,
        "precision": matrix.wrong_flag / precision_denominator if precision_denominator else None,
    }


def score_summary(outcomes: Sequence[EvalOutcome]) -> Dict[str, dict]:
    """Mean confidence and self-score (0-100 display scale) by stratum."""

    def collect(predicate) -> dict:
        confidences = [
            o.confidence * 100 for o in outcomes if predicate(o) and o.confidence is not None
        ]
        self_scores = [o.self_score for o in outcomes if predicate(o) and o.self_score is not None]
        return {
            "n": sum(1 for o in outcomes if predicate(o)),
            "mean_confidence": sum(confidences) / len(confidences) if confidences else None,
            "mean_self_score": sum(self_scores) / len(self_scores) if self_scores else None,
        }

    return {
        "flagged": collect(lambda o: o.hallucination_flagged),
        "not_flagged": collect(lambda o: not o.hallucination_flagged),
        "correct": collect(lambda o: o.answer_correct is True),
        "wrong": collect(lambda o: o.answer_correct is False),
    }


# -- reporting ---------------------------------------------------------------


def write_report(
    out_dir: str,
    outcomes: Sequence[EvalOutcome],
    parameters: Optional[dict] = None,
) -> dict:
    """Emit report.json and report.csv (plus the already-written
    outcomes.jsonl) into ``out_dir``; returns the report dict.

    Intentionally timestamp-free so identical runs produce identical bytes.
    """
    os.makedirs(out_dir, exist_ok=True)
    report: dict = {
        "parameters": parameters or {},
        "counts": {
            "questions": len(outcomes),
            "answerable": sum(1 for o in outcomes if o.answerable),
            "unanswerable": sum(1 for o in outcomes if not o.answerable),
            "failed": sum(1 for o in outcomes if o.error),
        },
        "score_summary": score_summary(outcomes),
    }
    try:
        matrices = confusion(outcomes)
        report["confusion"] = {s: m.to_dict() for s, m in matrices.items()}
        report["metrics"] = {s: metrics(m) if m.total else None for s, m in matrices.items()}
    except UnresolvedOutcome:
        report["unresolved_ids"] = [o.record_id for o in outcomes if o.answer_correct is None]

    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fp:
        json.dump(report, fp, indent=2, sort_keys=True, ensure_ascii=False)
        fp.write("\n")

    with open(os.path.join(out_dir, "report.csv"), "w", newline="", encoding="utf-8") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(
            ["stratum", "correct_noflag", "wrong_noflag", "correct_flag", "wrong_flag",
             "total", "accuracy", "recall", "precision"]
        )
        for stratum in (ANSWERABLE, UNANSWERABLE):
            matrix = report.get("confusion", {}).get(stratum)
            if matrix is None:
                writer.writerow([stratum] + ["unresolved"] * 8)
                continue
            stratum_metrics = report["metrics"][stratum] or {}
            writer.writerow(
                [
                    stratum,
                    matrix["correct_noflag"],
                    matrix["wrong_noflag"],
                    matrix["correct_flag"],
                    matrix["wrong_flag"],
                    matrix["total"],
                    _fmt(stratum_metrics.get("accuracy")),
                    _fmt(stratum_metrics.get("recall")),
                    _fmt(stratum_metrics.get("precision")),
                ]
            )
    return report


def _fmt(value: Optional[float]) -> str:
    return "undefined" if value is None else f"{value:.6f}"
