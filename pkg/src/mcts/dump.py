"""Tree dump files: one JSON document per annotated question."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

from agent.machine import IllegalTransition, transition
from agent.models import ActionKind, ActionStep, AgentState
from artifacts.utils import _read_json, _write_json
from mcts.tree import ROOT_ID, Sample, TreeNode

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path


class TreeFormatError(Exception):
    """Raised when a tree file cannot be rebuilt into a tree."""


@dataclass(frozen=True)
class AnnotatedTree:
    question_id: str
    question: str
    golden_answers: tuple[str, ...]
    source: str
    root: TreeNode


def _node_record(node: TreeNode) -> dict[str, Any]:
    action = node.action
    record: dict[str, Any] = {
        "id": node.node_id,
        "parent_id": node.parent_id,
        "action": None,
        "N": node.visit_count,
        "Q": node.q_value,
        "stage": node.stage.value,
        "expansion_value": node.expansion_value,
        "exhausted": node.exhausted,
        "samples": [{"steps": s.steps, "v": s.v} for s in node.samples],
    }
    if action is not None:
        record["action"] = {
            "kind": action.kind.value,
            "payload": action.payload,
            "raw_text": action.raw_text,
        }
        if action.kind is ActionKind.QUERY:
            record["action"]["doc_ids"] = list(node.doc_ids)
    if node.terminal_f1 is not None:
        record["terminal_f1"] = node.terminal_f1
    return record


def tree_record(
    root: TreeNode,
    *,
    question_id: str,
    golden_answers: Sequence[str],
    source: str = "",
) -> dict[str, Any]:
    return {
        "id": question_id,
        "question": root.state.question,
        "golden_answers": list(golden_answers),
        "source": source,
        "nodes": [_node_record(node) for node in root.walk()],
    }


def dump_tree(
    path: Path,
    root: TreeNode,
    *,
    question_id: str,
    golden_answers: Sequence[str],
    source: str = "",
) -> None:
    _write_json(
        path,
        tree_record(root, question_id=question_id, golden_answers=golden_answers, source=source),
    )


def _rebuild(record: dict[str, Any]) -> TreeNode:
    nodes: dict[str, TreeNode] = {}
    root: TreeNode | None = None
    for item in record["nodes"]:
        parent_id = item["parent_id"]
        if parent_id is None:
            state = AgentState(question=record["question"])
        else:
            parent = nodes[parent_id]
            action = item["action"]
            step = ActionStep(
                kind=ActionKind(action["kind"]),
                payload=action["payload"],
                raw_text=action["raw_text"],
            )
            state = transition(parent.state, step)
        node = TreeNode(
            node_id=item["id"],
            state=state,
            parent_id=parent_id,
            visit_count=item["N"],
            q_value=item["Q"],
            samples=[Sample(v=s["v"], steps=s["steps"]) for s in item["samples"]],
            terminal_f1=item.get("terminal_f1"),
            expansion_value=item.get("expansion_value", 0.0),
            doc_ids=tuple((item["action"] or {}).get("doc_ids", ())),
            exhausted=item.get("exhausted", False),
        )
        if node.stage.value != item["stage"]:
            msg = f"node {node.node_id}: stored stage {item['stage']} does not match its action"
            raise TreeFormatError(msg)
        if parent_id is None:
            root = node
        else:
            nodes[parent_id].children.append(node)
        nodes[node.node_id] = node
    if root is None or root.node_id != ROOT_ID:
        msg = "tree has no root node"
        raise TreeFormatError(msg)
    return root


def load_tree(path: Path) -> AnnotatedTree:
    """Rebuild a tree written by :func:`dump_tree`.

    Nodes are stored in pre-order, so every parent precedes its children.
    """
    try:
        record = _read_json(path)
        root = _rebuild(record)
        return AnnotatedTree(
            question_id=record["id"],
            question=record["question"],
            golden_answers=tuple(record["golden_answers"]),
            source=record.get("source", ""),
            root=root,
        )
    except TreeFormatError:
        raise
    except (OSError, IllegalTransition, KeyError, TypeError, ValueError) as exc:
        msg = f"{path}: invalid tree file ({exc})"
        raise TreeFormatError(msg) from exc


__all__ = ["AnnotatedTree", "TreeFormatError", "dump_tree", "load_tree", "tree_record"]
