"""Drop branches that never reach an answer."""

from __future__ import annotations

from dataclasses import replace

from agent.models import Stage
from mcts.tree import TreeNode


class EmptyTree(Exception):
    """Raised when a tree has no terminal node at all."""


def _prune(node: TreeNode) -> TreeNode | None:
    if node.stage is Stage.TERMINAL:
        return replace(node, children=[], samples=list(node.samples))
    kept = [pruned for child in node.children if (pruned := _prune(child)) is not None]
    if not kept:
        return None
    return replace(node, children=kept, samples=list(node.samples))


def prune_tree(root: TreeNode) -> TreeNode:
    """Copy of ``root`` whose every leaf is terminal.

    Visit counts, values and sample logs are copied unchanged.

    Raises:
        EmptyTree: No terminal node exists.
    """
    pruned = _prune(root)
    if pruned is None:
        msg = f"no answered branch for {root.state.question!r}"
        raise EmptyTree(msg)
    return pruned


__all__ = ["EmptyTree", "prune_tree"]
