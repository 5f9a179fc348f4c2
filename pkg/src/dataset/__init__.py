"""Preference-pair dataset construction from annotated trees."""

from dataset.export import (
    DatasetMetadata,
    PairsFormatError,
    PairValidationError,
    export_dataset,
    load_pairs,
)
from dataset.pairs import PairMode, PreferencePair, extract_pairs
from dataset.pruning import EmptyTree, prune_tree
from dataset.stats import DatasetStats, compute_stats, render_stats_table

__all__ = [
    "DatasetMetadata",
    "DatasetStats",
    "EmptyTree",
    "PairMode",
    "PairValidationError",
    "PairsFormatError",
    "PreferencePair",
    "compute_stats",
    "export_dataset",
    "extract_pairs",
    "load_pairs",
    "prune_tree",
    "render_stats_table",
]
