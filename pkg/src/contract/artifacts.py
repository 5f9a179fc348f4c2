"""Output artifact contract: file names, formats and schema version."""

from __future__ import annotations

from dataclasses import dataclass

ARTIFACT_SCHEMA_VERSION = 1

# Annotation outputs.
TREES_DIR = "trees"
PAIRS_JSONL = "pairs.jsonl"
PAIRS_META_JSON = "pairs.meta.json"
STATS_JSON = "stats.json"
FAILURES_JSONL = "failures.jsonl"

# Inference and evaluation outputs.
TRANSCRIPTS_JSONL = "transcripts.jsonl"
SWEEP_CSV = "sweep.csv"
SWEEP_JSON = "sweep.json"

# Default index cache written next to the corpus.
INDEX_CACHE_SUFFIX = ".index.json"


@dataclass(frozen=True)
class ArtifactSpec:
    """Where an artifact lives and how it is encoded."""

    filename: str
    format: str

    @property
    def is_dir(self) -> bool:
        return self.format == "json-dir"


ANNOTATION_ARTIFACT_SPECS: dict[str, ArtifactSpec] = {
    "trees": ArtifactSpec(filename=TREES_DIR, format="json-dir"),
    "pairs": ArtifactSpec(filename=PAIRS_JSONL, format="jsonl"),
    "pairs_meta": ArtifactSpec(filename=PAIRS_META_JSON, format="json"),
    "stats": ArtifactSpec(filename=STATS_JSON, format="json"),
}


def tree_filename(position: int, question_id: str) -> str:
    """File name of a question's tree; the position keeps input order."""
    safe = "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in question_id)
    return f"{position:05d}-{safe}.json"


__all__ = [
    "ANNOTATION_ARTIFACT_SPECS",
    "ARTIFACT_SCHEMA_VERSION",
    "FAILURES_JSONL",
    "INDEX_CACHE_SUFFIX",
    "PAIRS_JSONL",
    "PAIRS_META_JSON",
    "STATS_JSON",
    "SWEEP_CSV",
    "SWEEP_JSON",
    "TRANSCRIPTS_JSONL",
    "TREES_DIR",
    "ArtifactSpec",
    "tree_filename",
]
