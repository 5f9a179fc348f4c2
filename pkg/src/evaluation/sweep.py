"""Re-run inference along one configuration axis and tabulate EM/F1."""

from __future__ import annotations

import csv
import logging
from enum import Enum
from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict

from artifacts.utils import _write_json
from evaluation.golds import gold_map
from evaluation.harness import evaluate_run
from inference.engine import run_batch

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence
    from pathlib import Path

    from evaluation.golds import GoldRecord
    from inference.engine import InferenceConfig
    from policy.backends import PolicyBackend
    from retrieval.bm25 import Retriever

logger = logging.getLogger(__name__)


class SweepAxis(str, Enum):
    ROUNDS_CAP = "rounds"
    TOP_K = "top_k"


class SweepCell(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    value: int
    em: float
    f1: float
    n: int
    failures: int


def _cell_config(axis: SweepAxis, value: int, cfg: InferenceConfig) -> InferenceConfig:
    field = "max_rounds" if axis is SweepAxis.ROUNDS_CAP else "top_k"
    # Round-trip through validation so out-of-range values are rejected.
    return type(cfg).model_validate({**cfg.model_dump(), field: value})


def sweep(
    axis: SweepAxis,
    values: Sequence[int],
    questions: Sequence[GoldRecord],
    backend_factory: Callable[[], PolicyBackend],
    retriever: Retriever,
    cfg: InferenceConfig,
    *,
    parallelism: int = 1,
) -> list[SweepCell]:
    """One evaluated inference batch per axis value, in the order given.

    The rounds axis sets the policy-call budget, the top-k axis the documents
    per retrieval. Each cell runs against a new backend from
    ``backend_factory``. Failed runs are scored as unanswered and counted
    per cell.
    """
    if not values:
        msg = "sweep needs at least one value"
        raise ValueError(msg)
    golds = gold_map(list(questions))
    cells = []
    for value in values:
        transcripts = run_batch(
            questions,
            backend_factory(),
            retriever,
            _cell_config(axis, value, cfg),
            parallelism=parallelism,
        )
        summary = evaluate_run(transcripts, golds)
        logger.info(
            "Sweep %s=%d: EM %.1f F1 %.1f (%d failures)",
            axis.value,
            value,
            summary.em,
            summary.f1,
            summary.failures,
        )
        cells.append(
            SweepCell(
                value=value,
                em=summary.em,
                f1=summary.f1,
                n=summary.n,
                failures=summary.failures,
            )
        )
    return cells


def write_sweep_csv(path: Path, cells: Sequence[SweepCell]) -> None:
    """CSV with header ``value,em,f1,n``; scores to one decimal."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["value", "em", "f1", "n"])
        for cell in cells:
            writer.writerow([cell.value, f"{cell.em:.1f}", f"{cell.f1:.1f}", cell.n])


def write_sweep_json(path: Path, axis: SweepAxis, cells: Sequence[SweepCell]) -> None:
    """Plot-ready series: parallel value/em/f1 arrays plus per-cell detail."""
    _write_json(
        path,
        {
            "axis": axis.value,
            "values": [cell.value for cell in cells],
            "em": [cell.em for cell in cells],
            "f1": [cell.f1 for cell in cells],
            "cells": [cell.model_dump(mode="json") for cell in cells],
        },
    )


__all__ = ["SweepAxis", "SweepCell", "sweep", "write_sweep_csv", "write_sweep_json"]
