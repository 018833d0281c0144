"""Ablation harness: run retrieval-mode x ADH arms over a QA dataset.

Every example flows through the full pipeline (retrieve, abbreviation
augmentation, prompt, generate) and the generated answer is scored against
the reference with ROUGE-Lsum. Failed examples score zero instead of being
dropped, which biases against the system. With stub backends two runs of the
same configuration serialize to identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import DatasetError
from .pipeline import AnswerPipeline
from .rouge import RougeScore, ZERO_SCORE, rouge_lsum

logger = logging.getLogger(__name__)

REPORT_FORMATS = ("json", "csv", "markdown")


@dataclass(frozen=True)
class QaExample:
    question: str
    answer: str

    def __post_init__(self) -> None:
        if not self.question or not self.answer:
            raise DatasetError("question and answer must be non-empty")


@dataclass(frozen=True)
class EvalRecord:
    question: str
    reference: str
    generated: str
    score: RougeScore
    error: str | None = None


@dataclass
class ArmResult:
    mode: str
    adh: bool
    mean: RougeScore
    records: list[EvalRecord]
    errors: int


@dataclass
class AblationReport:
    dataset: str
    arms: list[ArmResult] = field(default_factory=list)


def load_dataset(path: str | Path) -> list[QaExample]:
    """Read a JSON Lines dataset: one {"question", "answer"} object per line."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read dataset {path}: {exc}") from exc
    examples = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            examples.append(QaExample(question=row["question"], answer=row["answer"]))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DatasetError(f"{path}:{lineno}: bad dataset row: {exc}") from exc
    if not examples:
        raise DatasetError(f"dataset {path} is empty")
    return examples


def _mean_score(records: Sequence[EvalRecord]) -> RougeScore:
    if not records:
        return ZERO_SCORE
    n = len(records)
    return RougeScore(
        precision=sum(r.score.precision for r in records) / n,
        recall=sum(r.score.recall for r in records) / n,
        f1=sum(r.score.f1 for r in records) / n,
    )


def _run_example(
    pipeline: AnswerPipeline, example: QaExample, mode: str, adh: bool
) -> EvalRecord:
    try:
        result = pipeline.ask(example.question, mode=mode, adh=adh)
    except Exception as exc:  # scored 0, run continues
        logger.warning("example failed (%s / adh=%s): %s", mode, adh, exc)
        return EvalRecord(
            question=example.question,
            reference=example.answer,
            generated="",
            score=ZERO_SCORE,
            error=str(exc),
        )
    return EvalRecord(
        question=example.question,
        reference=example.answer,
        generated=result.answer,
        score=rouge_lsum(example.answer, result.answer),
    )


def run_eval(
    examples: Sequence[QaExample],
    pipeline: AnswerPipeline,
    arms: Sequence[tuple[str, bool]],
    dataset_name: str = "dataset",
    parallelism: int = 1,
) -> AblationReport:
    """Evaluate every (mode, adh) arm; records keep dataset order."""
    report = AblationReport(dataset=dataset_name)
    for mode, adh in arms:
        if parallelism > 1:
            with ThreadPoolExecutor(max_workers=parallelism) as pool:
                records = list(
                    pool.map(lambda ex: _run_example(pipeline, ex, mode, adh), examples)
                )
        else:
            records = [_run_example(pipeline, ex, mode, adh) for ex in examples]
        report.arms.append(
            ArmResult(
                mode=mode,
                adh=adh,
                mean=_mean_score(records),
                records=records,
                errors=sum(1 for r in records if r.error),
            )
        )
    return report


def report_to_dict(report: AblationReport) -> dict:
    return {
        "dataset": report.dataset,
        "arms": [
            {
                "mode": arm.mode,
                "adh": arm.adh,
                "mean": {
                    "precision": arm.mean.precision,
                    "recall": arm.mean.recall,
                    "f1": arm.mean.f1,
                },
                "errors": arm.errors,
                "records": [
                    {
                        "question": r.question,
                        "reference": r.reference,
                        "generated": r.generated,
                        "precision": r.score.precision,
                        "recall": r.score.recall,
                        "f1": r.score.f1,
                        "error": r.error,
                    }
                    for r in arm.records
                ],
            }
            for arm in report.arms
        ],
    }


def report_from_dict(data: dict) -> AblationReport:
    report = AblationReport(dataset=data["dataset"])
    for arm in data["arms"]:
        records = [
            EvalRecord(
                question=r["question"],
                reference=r["reference"],
                generated=r["generated"],
                score=RougeScore(r["precision"], r["recall"], r["f1"]),
                error=r["error"],
            )
            for r in arm["records"]
        ]
        report.arms.append(
            ArmResult(
                mode=arm["mode"],
                adh=arm["adh"],
                mean=RougeScore(
                    arm["mean"]["precision"], arm["mean"]["recall"], arm["mean"]["f1"]
                ),
                records=records,
                errors=arm["errors"],
            )
        )
    return report


def render_report(report: AblationReport, fmt: str = "markdown") -> str:
    """Serialize a report as json, csv, or a markdown table."""
    if fmt == "json":
        return json.dumps(report_to_dict(report), ensure_ascii=False, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["dataset", "mode", "adh", "f1", "recall"])
        for arm in report.arms:
            writer.writerow(
                [
                    report.dataset,
                    arm.mode,
                    "on" if arm.adh else "off",
                    repr(arm.mean.f1),
                    repr(arm.mean.recall),
                ]
            )
        return buf.getvalue()
    if fmt == "markdown":
        lines = [
            f"# {report.dataset}",
            "",
            "| mode | adh | F1 | Recall |",
            "| --- | --- | --- | --- |",
        ]
        for arm in report.arms:
            lines.append(
                f"| {arm.mode} | {'on' if arm.adh else 'off'} "
                f"| {arm.mean.f1:.4f} | {arm.mean.recall:.4f} |"
            )
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r} (expected {REPORT_FORMATS})")
