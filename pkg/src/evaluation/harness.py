"""Per-question scoring of inference transcripts and run-level aggregates."""

from __future__ import annotations

from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, Field, model_validator

from evaluation.metrics import exact_match, f1_score

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from agent.models import Transcript


class MissingGold(Exception):
    """Raised when a transcript has no gold answers to score against."""

    def __init__(self, question_id: str) -> None:
        self.question_id = question_id
        super().__init__(f"no gold answers for {question_id!r}")


class EmptyEvaluation(Exception):
    """Raised when there is nothing to aggregate."""


class EvalRecord(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    question_id: str
    prediction: str
    golden_answers: tuple[str, ...]
    em: int = Field(ge=0, le=1)
    f1: float = Field(ge=0.0, le=1.0)
    rounds_used: int = Field(ge=0)
    retrieval_count: int = Field(ge=0)
    error: str | None = None

    @model_validator(mode="after")
    def check_em_implies_f1(self) -> EvalRecord:
        if self.em == 1 and self.f1 != 1.0:
            msg = "an exact match must have F1 = 1"
            raise ValueError(msg)
        return self


class EvalSummary(BaseModel):
    """Aggregates are percentages (means times 100)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    records: tuple[EvalRecord, ...]
    em: float
    f1: float
    n: int
    failures: int = 0


def score_transcript(transcript: Transcript, golden_answers: Sequence[str]) -> EvalRecord:
    """Score one transcript; an unanswered run predicts the empty string."""
    prediction = transcript.final_answer or ""
    return EvalRecord(
        question_id=transcript.key,
        prediction=prediction,
        golden_answers=tuple(golden_answers),
        em=exact_match(prediction, golden_answers),
        f1=f1_score(prediction, golden_answers),
        rounds_used=transcript.rounds_used,
        retrieval_count=len(transcript.retrievals),
        error=transcript.error,
    )


def evaluate_run(
    transcripts: Sequence[Transcript],
    gold_map: Mapping[str, Sequence[str]],
) -> EvalSummary:
    """Score every transcript and average EM and F1.

    Raises:
        MissingGold: A transcript's key is absent from ``gold_map``.
        EmptyEvaluation: ``transcripts`` is empty.
    """
    records = []
    for transcript in transcripts:
        golds = gold_map.get(transcript.key)
        if golds is None:
            raise MissingGold(transcript.key)
        records.append(score_transcript(transcript, golds))
    if not records:
        msg = "no transcripts to evaluate"
        raise EmptyEvaluation(msg)
    n = len(records)
    return EvalSummary(
        records=tuple(records),
        em=100.0 * sum(r.em for r in records) / n,
        f1=100.0 * sum(r.f1 for r in records) / n,
        n=n,
        failures=sum(1 for r in records if r.error is not None),
    )


__all__ = [
    "EmptyEvaluation",
    "EvalRecord",
    "EvalSummary",
    "MissingGold",
    "evaluate_run",
    "score_transcript",
]
