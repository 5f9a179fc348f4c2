"""Preference dataset JSONL files and their metadata sidecar.

Each line::

    {"question", "prefix": [raw_text, ...],
     "chosen": {"kind", "raw_text", "reward"},
     "rejected": {"kind", "raw_text", "reward"},
     "pair_type": [chosen_kind, rejected_kind], "source"}
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from agent.machine import IllegalTransition, transition
from agent.models import ActionKind, ActionStep, AgentState
from agent.placeholders import MalformedAction, parse_action
from artifacts.utils import JsonLineError, _read_json, _write_json, _write_jsonl, iter_jsonl
from contract.artifacts import ARTIFACT_SCHEMA_VERSION
from dataset.pairs import DEFAULT_THETA, PairMode, PreferencePair

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

DEFAULT_DPO_BETA = 0.1


class PairValidationError(Exception):
    """Raised before writing when a pair breaks a dataset invariant."""


class PairsFormatError(Exception):
    """Raised for an unreadable line in a pairs file."""

    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.reason = message
        self.line_number = line_number
        location = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{location}{message}")


class DatasetMetadata(BaseModel):
    """Settings that produced a dataset; ``dpo_beta`` is recorded for training only."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float
    c_uct: float
    theta: float = DEFAULT_THETA
    iterations: int
    mode: PairMode = PairMode.BEST_WORST
    dpo_beta: float = Field(default=DEFAULT_DPO_BETA, gt=0)
    schema_version: int = ARTIFACT_SCHEMA_VERSION
    pair_count: int = 0


def metadata_path(pairs_path: Path) -> Path:
    """``pairs.jsonl`` -> ``pairs.meta.json``."""
    return pairs_path.with_name(f"{pairs_path.stem}.meta.json")


def pair_record(pair: PreferencePair) -> dict[str, Any]:
    return {
        "question": pair.question,
        "prefix": [step.raw_text for step in pair.prefix],
        "chosen": {
            "kind": pair.chosen.kind.value,
            "raw_text": pair.chosen.raw_text,
            "reward": pair.chosen_reward,
        },
        "rejected": {
            "kind": pair.rejected.kind.value,
            "raw_text": pair.rejected.raw_text,
            "reward": pair.rejected_reward,
        },
        "pair_type": [kind.value for kind in pair.pair_type],
        "source": pair.source,
    }


def validate_pairs(pairs: Sequence[PreferencePair], theta: float) -> None:
    for position, pair in enumerate(pairs):
        if pair.gap < theta:
            msg = f"pair {position}: reward gap {pair.gap:.6f} is below {theta}"
            raise PairValidationError(msg)


def export_dataset(
    pairs: Sequence[PreferencePair],
    path: Path,
    *,
    metadata: DatasetMetadata,
) -> Path:
    """Write ``pairs`` to ``path`` plus the sidecar; returns the sidecar path.

    Raises:
        PairValidationError: A pair's gap is below ``metadata.theta``;
            nothing is written.
    """
    validate_pairs(pairs, metadata.theta)
    _write_jsonl(path, (pair_record(pair) for pair in pairs))
    sidecar = metadata_path(path)
    _write_json(sidecar, metadata.model_copy(update={"pair_count": len(pairs)}))
    return sidecar


def parse_pair(raw: dict[str, Any]) -> PreferencePair:
    """Rebuild one pair record; prefix steps are re-parsed from their text.

    Raises:
        PairsFormatError: A missing field, an illegal prefix or a response
            that does not parse as its recorded kind.
    """
    try:
        return _parse_pair(raw)
    except (
        KeyError,
        TypeError,
        ValueError,
        IllegalTransition,
        MalformedAction,
    ) as exc:
        raise PairsFormatError(f"invalid pair ({exc})") from exc


def _parse_pair(raw: dict[str, Any]) -> PreferencePair:
    question = raw["question"]
    state = AgentState(question=question)
    for text in raw["prefix"]:
        state = transition(state, parse_action(text, state.stage))
    position = len(state.steps)

    def step_of(side: dict[str, Any]) -> ActionStep:
        step = parse_action(side["raw_text"], state.stage, index=position)
        if step.kind is not ActionKind(side["kind"]):
            msg = f"recorded kind {side['kind']} does not match the response"
            raise ValueError(msg)
        return step

    return PreferencePair(
        question=question,
        prefix=state.steps,
        chosen=step_of(raw["chosen"]),
        rejected=step_of(raw["rejected"]),
        chosen_reward=raw["chosen"]["reward"],
        rejected_reward=raw["rejected"]["reward"],
        source=raw.get("source", ""),
    )


def load_pairs(path: Path) -> list[PreferencePair]:
    """Read a pairs file back; prefix steps are re-parsed from their text.

    Raises:
        PairsFormatError: With the 1-based line number of the bad record.
    """
    pairs: list[PreferencePair] = []
    try:
        for line_number, raw in iter_jsonl(path):
            try:
                pairs.append(parse_pair(raw))
            except PairsFormatError as exc:
                raise PairsFormatError(exc.reason, line_number) from exc
    except JsonLineError as exc:
        raise PairsFormatError(str(exc), exc.line_number) from exc
    except OSError as exc:
        raise PairsFormatError(f"cannot read {path}: {exc}") from exc
    return pairs


def load_metadata(path: Path) -> DatasetMetadata:
    try:
        return DatasetMetadata.model_validate(_read_json(path))
    except (OSError, ValueError, ValidationError) as exc:
        raise PairsFormatError(f"invalid metadata {path}: {exc}") from exc


__all__ = [
    "DEFAULT_DPO_BETA",
    "DatasetMetadata",
    "PairValidationError",
    "PairsFormatError",
    "export_dataset",
    "load_metadata",
    "load_pairs",
    "metadata_path",
    "pair_record",
    "parse_pair",
    "validate_pairs",
]
