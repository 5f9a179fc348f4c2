"""Question/gold-answer files shared by annotation, inference and evaluation.

One JSON object per line: ``{"id", "question", "golden_answers", "source"?}``.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from artifacts.utils import JsonLineError, iter_jsonl

if TYPE_CHECKING:
    from pathlib import Path


class GoldFormatError(Exception):
    """Raised for an invalid line in a gold/questions file."""

    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.line_number = line_number
        location = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{location}{message}")


class GoldRecord(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(min_length=1)
    question: str = Field(min_length=1)
    golden_answers: tuple[str, ...] = Field(min_length=1)
    source: str = ""

    @field_validator("id", "question")
    @classmethod
    def _not_blank(cls, value: str) -> str:
        if not value.strip():
            msg = "must not be blank"
            raise ValueError(msg)
        return value


def load_golds(path: Path) -> list[GoldRecord]:
    """Read a gold file in line order.

    Raises:
        GoldFormatError: Invalid JSON, a schema violation or a repeated id.
    """
    records: list[GoldRecord] = []
    seen: set[str] = set()
    try:
        for line_number, raw in iter_jsonl(path):
            try:
                record = GoldRecord.model_validate(raw)
            except ValidationError as exc:
                raise GoldFormatError(str(exc), line_number) from exc
            if record.id in seen:
                raise GoldFormatError(f"duplicate question id {record.id!r}", line_number)
            seen.add(record.id)
            records.append(record)
    except JsonLineError as exc:
        raise GoldFormatError(str(exc), exc.line_number) from exc
    except OSError as exc:
        raise GoldFormatError(f"cannot read {path}: {exc}") from exc
    return records


def gold_map(records: list[GoldRecord]) -> dict[str, tuple[str, ...]]:
    """Map question id to golden answers."""
    return {record.id: record.golden_answers for record in records}


__all__ = ["GoldFormatError", "GoldRecord", "gold_map", "load_golds"]
