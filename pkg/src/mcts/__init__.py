"""Search-tree annotation of process rewards."""

from mcts.dump import AnnotatedTree, dump_tree, load_tree
from mcts.search import (
    Annotation,
    AnnotationFailed,
    ExpansionFailed,
    NoChildren,
    annotate_batch,
    annotate_question,
    backpropagate,
    expand,
    select_child,
)
from mcts.tree import MctsConfig, Sample, TreeNode

__all__ = [
    "AnnotatedTree",
    "Annotation",
    "AnnotationFailed",
    "ExpansionFailed",
    "MctsConfig",
    "NoChildren",
    "Sample",
    "TreeNode",
    "annotate_batch",
    "annotate_question",
    "backpropagate",
    "dump_tree",
    "expand",
    "load_tree",
    "select_child",
]
