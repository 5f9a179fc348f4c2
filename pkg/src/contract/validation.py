"""Validation of an annotation output directory."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import orjson
from pydantic import ValidationError

from artifacts.utils import JsonLineError, iter_jsonl
from contract.artifacts import ANNOTATION_ARTIFACT_SPECS, ARTIFACT_SCHEMA_VERSION
from dataset.export import DatasetMetadata, PairsFormatError, parse_pair
from dataset.stats import DatasetStats
from mcts.dump import TreeFormatError, load_tree

if TYPE_CHECKING:
    from pathlib import Path

    from dataset.pairs import PreferencePair


@dataclass(frozen=True)
class ValidationMessage:
    artifact: str
    path: Path
    message: str
    line: int | None = None

    def location(self) -> str:
        if self.line is None:
            return str(self.path)
        return f"{self.path}:{self.line}"

    def to_dict(self) -> dict[str, object]:
        return {
            "artifact": self.artifact,
            "path": str(self.path),
            "line": self.line,
            "message": self.message,
        }


@dataclass
class ValidationResult:
    errors: list[ValidationMessage] = field(default_factory=list)
    warnings: list[ValidationMessage] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_artifacts(
    artifacts_dir: Path,
    *,
    strict_schema_version: bool = False,
) -> ValidationResult:
    """Check trees, pairs, the pairs sidecar and stats under ``artifacts_dir``.

    Pairs are checked line by line and against the sidecar's gap threshold
    and pair count.
    """
    result = ValidationResult()

    if not artifacts_dir.exists():
        result.errors.append(
            ValidationMessage(
                artifact="artifacts_dir",
                path=artifacts_dir,
                message="Artifacts directory does not exist.",
            )
        )
        return result

    if not artifacts_dir.is_dir():
        result.errors.append(
            ValidationMessage(
                artifact="artifacts_dir",
                path=artifacts_dir,
                message="Artifacts path is not a directory.",
            )
        )
        return result

    paths = {name: artifacts_dir / spec.filename for name, spec in ANNOTATION_ARTIFACT_SPECS.items()}
    for name, spec in ANNOTATION_ARTIFACT_SPECS.items():
        path = paths[name]
        if not path.exists():
            message = "Required artifact is missing."
        elif spec.is_dir != path.is_dir():
            kind = "a directory" if spec.is_dir else "a file"
            message = f"Expected {kind} for {spec.format} artifact."
        else:
            continue
        result.errors.append(ValidationMessage(artifact=name, path=path, message=message))
    if not result.ok:
        return result

    _validate_trees(paths["trees"], result)
    metadata = _validate_json_model(
        "pairs_meta", paths["pairs_meta"], DatasetMetadata, result,
        strict_schema_version=strict_schema_version,
    )
    pairs = _validate_pairs(paths["pairs"], result)
    _validate_json_model(
        "stats", paths["stats"], DatasetStats, result,
        strict_schema_version=strict_schema_version,
    )

    if isinstance(metadata, DatasetMetadata):
        _check_pairs_against_metadata(pairs, metadata, paths["pairs"], result)
    return result


def _validate_trees(trees_dir: Path, result: ValidationResult) -> None:
    for path in sorted(trees_dir.glob("*.json")):
        try:
            load_tree(path)
        except TreeFormatError as exc:
            result.errors.append(
                ValidationMessage(artifact="trees", path=path, message=str(exc))
            )


def _validate_pairs(path: Path, result: ValidationResult) -> list[tuple[int, PreferencePair]]:
    pairs: list[tuple[int, PreferencePair]] = []
    try:
        for line_number, raw in iter_jsonl(path):
            try:
                pairs.append((line_number, parse_pair(raw)))
            except PairsFormatError as exc:
                result.errors.append(
                    ValidationMessage(
                        artifact="pairs",
                        path=path,
                        line=line_number,
                        message=f"Invalid pair: {exc.reason}.",
                    )
                )
    except JsonLineError as exc:
        # Reading stops at the first undecodable line.
        result.errors.append(
            ValidationMessage(
                artifact="pairs",
                path=path,
                line=exc.line_number,
                message=f"Invalid JSON: {exc.reason}.",
            )
        )
    return pairs


def _validate_json_model(
    artifact_name: str,
    path: Path,
    model: type[DatasetMetadata] | type[DatasetStats],
    result: ValidationResult,
    *,
    strict_schema_version: bool,
) -> DatasetMetadata | DatasetStats | None:
    try:
        raw: Any = orjson.loads(path.read_bytes())
    except (OSError, orjson.JSONDecodeError) as exc:
        result.errors.append(
            ValidationMessage(artifact=artifact_name, path=path, message=f"Invalid JSON: {exc}.")
        )
        return None

    if not isinstance(raw, dict):
        result.errors.append(
            ValidationMessage(
                artifact=artifact_name,
                path=path,
                message=f"Expected JSON object for {path.name}.",
            )
        )
        return None

    schema_present = "schema_version" in raw
    try:
        record = model.model_validate(raw)
    except ValidationError as exc:
        result.errors.append(
            ValidationMessage(
                artifact=artifact_name,
                path=path,
                message=f"Schema validation failed: {exc}.",
            )
        )
        return None

    _check_schema_version(
        artifact_name,
        path,
        schema_present,
        record.schema_version,
        result,
        strict_schema_version=strict_schema_version,
    )
    return record


def _check_pairs_against_metadata(
    pairs: list[tuple[int, PreferencePair]],
    metadata: DatasetMetadata,
    path: Path,
    result: ValidationResult,
) -> None:
    for line_number, pair in pairs:
        if pair.gap < metadata.theta:
            result.errors.append(
                ValidationMessage(
                    artifact="pairs",
                    path=path,
                    line=line_number,
                    message=f"Reward gap {pair.gap:.6f} is below theta {metadata.theta}.",
                )
            )
    if not result.errors and len(pairs) != metadata.pair_count:
        result.errors.append(
            ValidationMessage(
                artifact="pairs_meta",
                path=path,
                message=f"Sidecar records {metadata.pair_count} pairs, file has {len(pairs)}.",
            )
        )


def _check_schema_version(
    artifact_name: str,
    path: Path,
    schema_present: bool,
    schema_version: int,
    result: ValidationResult,
    *,
    strict_schema_version: bool,
) -> None:
    if schema_present and schema_version != ARTIFACT_SCHEMA_VERSION:
        result.errors.append(
            ValidationMessage(
                artifact=artifact_name,
                path=path,
                message=(
                    "Schema version mismatch: "
                    f"expected {ARTIFACT_SCHEMA_VERSION}, got {schema_version}."
                ),
            )
        )
        return

    if not schema_present:
        message = f"Missing schema_version; defaulted to {ARTIFACT_SCHEMA_VERSION}."
        target = result.errors if strict_schema_version else result.warnings
        target.append(ValidationMessage(artifact=artifact_name, path=path, message=message))


__all__ = [
    "ValidationMessage",
    "ValidationResult",
    "validate_artifacts",
]
