"""Deterministic JSON/JSONL writers and readers for pipeline artifacts."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

import orjson

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator
    from pathlib import Path


class JsonLineError(Exception):
    """Raised when a JSONL line is not a JSON object."""

    def __init__(self, message: str, path: Path, line_number: int) -> None:
        self.reason = message
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {message}")


def _to_dict(obj: object) -> object:
    """Convert object to a JSON-ready value."""
    from dataclasses import asdict, is_dataclass

    if hasattr(obj, "model_dump"):
        return obj.model_dump(mode="json")
    if is_dataclass(obj) and not isinstance(obj, type):
        return asdict(obj)
    return obj


def dumps_line(obj: object) -> bytes:
    """Serialize one JSONL record (sorted keys, trailing newline)."""
    return orjson.dumps(_to_dict(obj), option=orjson.OPT_SORT_KEYS) + b"\n"


def _write_jsonl(path: Path, records: Iterable[object]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as f:
        for rec in records:
            f.write(dumps_line(rec))


def _write_json(path: Path, obj: object) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = _to_dict(obj)
    opts = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_APPEND_NEWLINE
    path.write_bytes(orjson.dumps(payload, option=opts))


def _read_json(path: Path) -> Any:
    return orjson.loads(path.read_bytes())


def iter_jsonl(path: Path) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield ``(line_number, record)`` for each non-blank line.

    Raises:
        JsonLineError: A line is not valid JSON or not an object.
    """
    with path.open("rb") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = orjson.loads(line)
            except orjson.JSONDecodeError as exc:
                raise JsonLineError(f"invalid JSON ({exc})", path, line_number) from exc
            if not isinstance(record, dict):
                raise JsonLineError("expected a JSON object", path, line_number)
            yield line_number, record
