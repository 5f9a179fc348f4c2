"""Corpus ingestion into an inverted index, and the index cache file."""

from __future__ import annotations

import hashlib
import logging
import math
from collections import Counter
from typing import TYPE_CHECKING

import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from artifacts.utils import _write_json
from evaluation.metrics import normalize
from retrieval.models import Document

if TYPE_CHECKING:
    from pathlib import Path

logger = logging.getLogger(__name__)

INDEX_FORMAT_TAG = "stepwise-bm25/v1"


class CorpusFormatError(Exception):
    """Raised for an unreadable corpus line."""

    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.line_number = line_number
        location = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{location}{message}")


class DuplicateDocId(CorpusFormatError):
    """Raised when two corpus lines share a document id."""

    def __init__(self, doc_id: str, line_number: int) -> None:
        self.doc_id = doc_id
        super().__init__(f"duplicate document id {doc_id!r}", line_number)


class Posting(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    doc_id: str
    tf: int = Field(ge=1)


class CorpusIndex(BaseModel):
    """Immutable inverted index over a corpus."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    format: str = INDEX_FORMAT_TAG
    corpus_sha256: str = ""
    doc_count: int = Field(gt=0)
    documents: dict[str, Document]
    postings: dict[str, tuple[Posting, ...]]
    doc_lengths: dict[str, int]
    avg_doc_length: float = Field(gt=0)

    @model_validator(mode="after")
    def check_consistency(self) -> CorpusIndex:
        if len(self.documents) != self.doc_count or set(self.doc_lengths) != set(self.documents):
            msg = "doc_count, documents and doc_lengths disagree"
            raise ValueError(msg)
        mean = sum(self.doc_lengths.values()) / self.doc_count
        if abs(mean - self.avg_doc_length) > 1e-9:
            msg = f"avg_doc_length {self.avg_doc_length} != {mean}"
            raise ValueError(msg)
        for term, postings in self.postings.items():
            for posting in postings:
                if posting.doc_id not in self.documents:
                    msg = f"posting for {term!r} references unknown doc {posting.doc_id!r}"
                    raise ValueError(msg)
        return self


def document_terms(doc: Document) -> list[str]:
    """Tokens indexed for ``doc`` (title then contents)."""
    return normalize(f"{doc.title} {doc.contents}")


def _parse_line(line_number: int, line: bytes) -> Document:
    try:
        record = orjson.loads(line)
    except orjson.JSONDecodeError as exc:
        raise CorpusFormatError(f"invalid JSON ({exc})", line_number) from exc
    if not isinstance(record, dict):
        raise CorpusFormatError("expected a JSON object", line_number)

    doc_id = record.get("id")
    contents = record.get("contents")
    title = record.get("title", "")
    if not isinstance(doc_id, str) or not doc_id:
        raise CorpusFormatError("'id' must be a non-empty string", line_number)
    if not isinstance(contents, str) or not contents.strip():
        raise CorpusFormatError("'contents' must be a non-empty string", line_number)
    if title is None:
        title = ""
    if not isinstance(title, str):
        raise CorpusFormatError("'title' must be a string", line_number)
    return Document(id=doc_id, title=title, contents=contents)


def build_index(documents: list[Document], *, corpus_sha256: str = "") -> CorpusIndex:
    """Build an index from documents already checked for unique ids."""
    if not documents:
        raise CorpusFormatError("corpus contains no documents")

    term_postings: dict[str, list[Posting]] = {}
    doc_lengths: dict[str, int] = {}
    for doc in sorted(documents, key=lambda d: d.id):
        terms = document_terms(doc)
        doc_lengths[doc.id] = len(terms)
        for term, tf in sorted(Counter(terms).items()):
            term_postings.setdefault(term, []).append(Posting(doc_id=doc.id, tf=tf))

    total = sum(doc_lengths.values())
    if not total:
        raise CorpusFormatError("corpus has no indexable terms")

    return CorpusIndex(
        corpus_sha256=corpus_sha256,
        doc_count=len(doc_lengths),
        documents={doc.id: doc for doc in documents},
        postings={term: tuple(plist) for term, plist in sorted(term_postings.items())},
        doc_lengths=doc_lengths,
        avg_doc_length=total / len(doc_lengths),
    )


def ingest_corpus(path: Path) -> CorpusIndex:
    """Read a JSONL corpus and build its inverted index.

    Raises:
        CorpusFormatError: A line is not a valid document (carries the
            1-based line number).
        DuplicateDocId: An id appears twice.
    """
    raw = path.read_bytes()
    documents: list[Document] = []
    seen: set[str] = set()
    for line_number, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        doc = _parse_line(line_number, line)
        if doc.id in seen:
            raise DuplicateDocId(doc.id, line_number)
        seen.add(doc.id)
        documents.append(doc)

    index = build_index(documents, corpus_sha256=hashlib.sha256(raw).hexdigest())
    logger.info("Indexed %d documents from %s", index.doc_count, path)
    return index


def save_index(index: CorpusIndex, path: Path) -> None:
    _write_json(path, index)


def load_index(path: Path) -> CorpusIndex:
    """Load a cached index, rejecting unknown format tags."""
    try:
        data = orjson.loads(path.read_bytes())
    except orjson.JSONDecodeError as exc:
        msg = f"index cache {path} is not valid JSON: {exc}"
        raise CorpusFormatError(msg) from exc
    if not isinstance(data, dict) or data.get("format") != INDEX_FORMAT_TAG:
        msg = f"index cache {path} has an unsupported format tag"
        raise CorpusFormatError(msg)
    try:
        return CorpusIndex.model_validate(data)
    except ValidationError as exc:
        msg = f"index cache {path} is invalid: {exc}"
        raise CorpusFormatError(msg) from exc


def load_or_build_index(corpus_path: Path, cache_path: Path | None = None) -> CorpusIndex:
    """Return the cached index for ``corpus_path``, rebuilding when stale."""
    if cache_path is not None and cache_path.is_file():
        digest = hashlib.sha256(corpus_path.read_bytes()).hexdigest()
        try:
            cached = load_index(cache_path)
        except CorpusFormatError:
            logger.warning("Index cache %s unreadable, rebuilding", cache_path)
        else:
            if cached.corpus_sha256 == digest:
                return cached
            logger.info("Index cache %s is stale, rebuilding", cache_path)

    index = ingest_corpus(corpus_path)
    if cache_path is not None:
        save_index(index, cache_path)
    return index


def idf(doc_count: int, doc_freq: int) -> float:
    """Non-negative BM25 inverse document frequency."""
    return math.log((doc_count - doc_freq + 0.5) / (doc_freq + 0.5) + 1.0)


__all__ = [
    "INDEX_FORMAT_TAG",
    "CorpusFormatError",
    "CorpusIndex",
    "DuplicateDocId",
    "Posting",
    "build_index",
    "idf",
    "ingest_corpus",
    "load_index",
    "load_or_build_index",
    "save_index",
]
