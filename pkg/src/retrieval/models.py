"""Retrievable passage model."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, field_validator


class Document(BaseModel):
    """A passage in a corpus; ``score`` is populated by retrieval."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(min_length=1)
    title: str = ""
    contents: str
    score: float = 0.0

    @field_validator("contents")
    @classmethod
    def validate_contents(cls, v: str) -> str:
        if not v.strip():
            msg = "contents must be non-empty"
            raise ValueError(msg)
        return v


__all__ = ["Document"]
