"""Transcript JSONL export and import.

Record shape::

    {"id", "question", "steps": [{"kind", "payload", "raw_text"}],
     "retrievals": [{"doc_ids", "query"}], "final_answer"?, "rounds_used",
     "error"?}

Document bodies are never written; only their ids.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

from pydantic import ValidationError

from agent.models import ActionStep, Retrieval, Transcript
from artifacts.utils import JsonLineError, _write_jsonl, iter_jsonl

if TYPE_CHECKING:
    from collections.abc import Iterable
    from pathlib import Path


class TranscriptFormatError(Exception):
    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.line_number = line_number
        location = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{location}{message}")


def transcript_record(transcript: Transcript) -> dict[str, Any]:
    record: dict[str, Any] = {
        "id": transcript.key,
        "question": transcript.question,
        "steps": [
            {"kind": step.kind.value, "payload": step.payload, "raw_text": step.raw_text}
            for step in transcript.steps
        ],
        "retrievals": [
            {"doc_ids": list(retrieval.doc_ids), "query": retrieval.query}
            for retrieval in transcript.retrievals
        ],
        "rounds_used": transcript.rounds_used,
    }
    if transcript.final_answer is not None:
        record["final_answer"] = transcript.final_answer
    if transcript.error is not None:
        record["error"] = transcript.error
    return record


def save_transcripts(path: Path, transcripts: Iterable[Transcript]) -> None:
    _write_jsonl(path, (transcript_record(t) for t in transcripts))


def _parse_record(raw: dict[str, Any]) -> Transcript:
    steps = tuple(
        ActionStep(index=position, **step) for position, step in enumerate(raw.get("steps", []))
    )
    retrievals = tuple(
        Retrieval(query=item["query"], doc_ids=tuple(item.get("doc_ids", ())))
        for item in raw.get("retrievals", [])
    )
    return Transcript(
        question=raw["question"],
        question_id=raw.get("id"),
        steps=steps,
        retrievals=retrievals,
        final_answer=raw.get("final_answer"),
        rounds_used=raw["rounds_used"],
        error=raw.get("error"),
    )


def load_transcripts(path: Path) -> list[Transcript]:
    """Read transcripts written by :func:`save_transcripts`.

    Raises:
        TranscriptFormatError: A line is not a valid transcript record.
    """
    transcripts: list[Transcript] = []
    try:
        for line_number, raw in iter_jsonl(path):
            try:
                transcripts.append(_parse_record(raw))
            except (KeyError, TypeError, ValidationError) as exc:
                raise TranscriptFormatError(f"invalid transcript ({exc})", line_number) from exc
    except JsonLineError as exc:
        raise TranscriptFormatError(str(exc), exc.line_number) from exc
    except OSError as exc:
        raise TranscriptFormatError(f"cannot read {path}: {exc}") from exc
    return transcripts


__all__ = [
    "TranscriptFormatError",
    "load_transcripts",
    "save_transcripts",
    "transcript_record",
]
