"""Artifact contract: file layout of annotation and evaluation outputs."""

from contract.artifacts import (
    ANNOTATION_ARTIFACT_SPECS,
    ARTIFACT_SCHEMA_VERSION,
    FAILURES_JSONL,
    PAIRS_JSONL,
    PAIRS_META_JSON,
    STATS_JSON,
    SWEEP_CSV,
    SWEEP_JSON,
    TRANSCRIPTS_JSONL,
    TREES_DIR,
    ArtifactSpec,
    tree_filename,
)


def __getattr__(name: str) -> object:
    if name in {"ValidationMessage", "ValidationResult", "validate_artifacts"}:
        from contract.validation import (
            ValidationMessage,
            ValidationResult,
            validate_artifacts,
        )

        return {
            "ValidationMessage": ValidationMessage,
            "ValidationResult": ValidationResult,
            "validate_artifacts": validate_artifacts,
        }[name]

    msg = f"module 'contract' has no attribute {name!r}"
    raise AttributeError(msg)


__all__ = [
    "ANNOTATION_ARTIFACT_SPECS",
    "ARTIFACT_SCHEMA_VERSION",
    "FAILURES_JSONL",
    "PAIRS_JSONL",
    "PAIRS_META_JSON",
    "STATS_JSON",
    "SWEEP_CSV",
    "SWEEP_JSON",
    "TRANSCRIPTS_JSONL",
    "TREES_DIR",
    "ArtifactSpec",
    "ValidationMessage",
    "ValidationResult",
    "tree_filename",
    "validate_artifacts",
]
