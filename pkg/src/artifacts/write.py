from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

from artifacts.utils import _write_json, _write_jsonl
from contract.artifacts import (
    FAILURES_JSONL,
    PAIRS_JSONL,
    STATS_JSON,
    TRANSCRIPTS_JSONL,
    TREES_DIR,
    tree_filename,
)
from dataset.export import DatasetMetadata, export_dataset
from dataset.pairs import extract_pairs
from dataset.pruning import EmptyTree, prune_tree
from dataset.stats import compute_stats
from inference.engine import run_batch
from inference.transcripts import save_transcripts
from mcts.dump import dump_tree
from mcts.search import annotate_batch

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from agent.models import Transcript
    from dataset.pairs import PreferencePair
    from dataset.stats import DatasetStats
    from evaluation.golds import GoldRecord
    from mcts.tree import TreeNode
    from policy.backends import PolicyBackend
    from retrieval.bm25 import Retriever
    from settings.config import RunConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnnotationSummary:
    question_count: int
    succeeded: int
    pairs: tuple[PreferencePair, ...]
    stats: DatasetStats
    failures: tuple[dict[str, str], ...] = ()


def _clear_trees(trees_dir: Path) -> None:
    if trees_dir.is_dir():
        for stale in trees_dir.glob("*.json"):
            stale.unlink()


def write_annotation_artifacts(
    *,
    questions: Sequence[GoldRecord],
    config: RunConfig,
    out_dir: Path,
    backend: PolicyBackend,
    retriever: Retriever,
) -> AnnotationSummary:
    """Annotate every question and write trees, pairs, sidecar, stats and failures.

    A question counts as succeeded when its tree holds at least one answered
    branch; the others are listed in ``failures.jsonl``.
    """
    mcts_cfg = config.mcts_config()

    annotations = annotate_batch(
        questions, backend, retriever, mcts_cfg, parallelism=config.parallelism
    )

    trees_dir = out_dir / TREES_DIR
    _clear_trees(trees_dir)
    pairs: list[PreferencePair] = []
    pruned_roots: list[TreeNode] = []
    failures: list[dict[str, str]] = []
    for position, annotation in enumerate(annotations):
        record = annotation.record
        if annotation.root is None:
            failures.append({"id": record.id, "reason": annotation.error or "annotation failed"})
            continue
        dump_tree(
            trees_dir / tree_filename(position, record.id),
            annotation.root,
            question_id=record.id,
            golden_answers=record.golden_answers,
            source=record.source,
        )
        try:
            pruned = prune_tree(annotation.root)
        except EmptyTree as exc:
            logger.warning("Skipping %s: %s", record.id, exc)
            failures.append({"id": record.id, "reason": str(exc)})
            continue
        pruned_roots.append(pruned)
        pairs.extend(
            extract_pairs(
                pruned,
                config.dataset.theta,
                config.dataset.mode,
                source=record.source or config.dataset.source,
            )
        )

    pairs_path = out_dir / PAIRS_JSONL
    export_dataset(
        pairs,
        pairs_path,
        metadata=DatasetMetadata(
            alpha=mcts_cfg.alpha,
            c_uct=mcts_cfg.c_uct,
            theta=config.dataset.theta,
            iterations=mcts_cfg.iterations,
            mode=config.dataset.mode,
            dpo_beta=config.dataset.dpo_beta,
        ),
    )
    stats = compute_stats(pairs, pruned_roots)
    _write_json(out_dir / STATS_JSON, stats)
    _write_jsonl(out_dir / FAILURES_JSONL, failures)

    return AnnotationSummary(
        question_count=len(questions),
        succeeded=len(pruned_roots),
        pairs=tuple(pairs),
        stats=stats,
        failures=tuple(failures),
    )


def write_inference_artifacts(
    *,
    questions: Sequence[GoldRecord],
    config: RunConfig,
    out_dir: Path,
    backend: PolicyBackend,
    retriever: Retriever,
) -> list[Transcript]:
    """Run inference for every question and write ``transcripts.jsonl``."""
    transcripts = run_batch(
        questions,
        backend,
        retriever,
        config.inference_config(),
        parallelism=config.parallelism,
    )
    save_transcripts(out_dir / TRANSCRIPTS_JSONL, transcripts)
    return transcripts


__all__ = ["AnnotationSummary", "write_annotation_artifacts", "write_inference_artifacts"]
