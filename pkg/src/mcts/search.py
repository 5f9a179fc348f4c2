"""Selection, expansion and backpropagation over a per-question tree.

Node values follow a discounted Monte Carlo estimate: every backpropagated
value ``v`` from a trajectory of ``steps`` actions contributes
``v * alpha**steps`` to the mean held in ``q_value``, so shorter correct
trajectories earn more.
"""

from __future__ import annotations

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING

from agent.machine import attach_documents, transition
from agent.models import ActionKind, AgentState, Stage
from agent.placeholders import MalformedAction
from errors import BackendUnavailable
from evaluation.metrics import f1_score
from mcts.tree import ROOT_ID, Sample, TreeNode, discounted_mean
from policy.generate import generate_action
from policy.judge import UnparsableScore, judge_evaluate
from retrieval.remote import MalformedRetrievalReply

if TYPE_CHECKING:
    from collections.abc import Sequence

    from evaluation.golds import GoldRecord
    from mcts.tree import MctsConfig
    from policy.backends import PolicyBackend
    from retrieval.bm25 import Retriever

logger = logging.getLogger(__name__)


class NoChildren(Exception):
    """Raised when selecting among the children of a leaf."""


class ExpansionFailed(Exception):
    """Raised when a node could not produce a child."""


class AnnotationFailed(Exception):
    """Raised when the root of a question's tree cannot be expanded."""


def uct_score(child: TreeNode, total_visits: int, c_uct: float) -> float:
    return child.q_value + c_uct * math.sqrt(total_visits) / (1 + child.visit_count)


def select_child(node: TreeNode, c_uct: float) -> TreeNode:
    """Child with the highest UCT score; the lowest index wins ties."""
    if not node.children:
        msg = f"node {node.node_id} has no children"
        raise NoChildren(msg)
    total = sum(child.visit_count for child in node.children)
    best = node.children[0]
    best_score = uct_score(best, total, c_uct)
    for child in node.children[1:]:
        score = uct_score(child, total, c_uct)
        if score > best_score:
            best, best_score = child, score
    return best


def is_expandable(node: TreeNode, cfg: MctsConfig) -> bool:
    return (
        node.stage is not Stage.TERMINAL
        and not node.exhausted
        and len(node.children) < cfg.max_children
        and node.depth < cfg.max_depth
    )


def _expansion_seed(base: int | None, node_id: str) -> int | None:
    if base is None:
        return None
    digest = hashlib.sha256(f"{base}:{node_id}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


def _score_state(
    state: AgentState,
    golden_answers: Sequence[str],
    backend: PolicyBackend,
    cfg: MctsConfig,
    seed: int | None,
) -> float:
    try:
        return judge_evaluate(
            state,
            golden_answers,
            backend,
            max_output_tokens=cfg.max_output_tokens,
            seed=seed,
        ).value
    except (UnparsableScore, BackendUnavailable) as exc:
        logger.warning(
            "Judge gave no usable score (%s); using fallback %s", exc, cfg.judge_fallback_v
        )
        return cfg.judge_fallback_v


def expand(
    node: TreeNode,
    backend: PolicyBackend,
    retriever: Retriever,
    golden_answers: Sequence[str],
    cfg: MctsConfig,
) -> TreeNode:
    """Sample one action from ``node`` and attach the scored child.

    Answer children are scored by token F1 against the golden answers; other
    children by the judge. A query child carries its retrieved documents.

    Raises:
        ExpansionFailed: The policy or the retriever failed.
    """
    if not is_expandable(node, cfg):
        msg = f"node {node.node_id} is not expandable"
        raise ExpansionFailed(msg)

    child_id = node.child_id()
    seed = _expansion_seed(cfg.seed, child_id)
    try:
        step = generate_action(
            node.state,
            backend,
            answer_format=cfg.answer_format,
            temperature=cfg.temperature,
            max_output_tokens=cfg.max_output_tokens,
            seed=seed,
            malformed_retries=cfg.malformed_retries,
        )
    except (MalformedAction, BackendUnavailable) as exc:
        msg = f"policy failed at node {node.node_id}: {exc}"
        raise ExpansionFailed(msg) from exc

    state = transition(node.state, step)
    doc_ids: tuple[str, ...] = ()
    if step.kind is ActionKind.QUERY:
        try:
            docs = retriever.retrieve(step.payload, cfg.top_k)
        except (BackendUnavailable, MalformedRetrievalReply) as exc:
            msg = f"retrieval failed at node {node.node_id}: {exc}"
            raise ExpansionFailed(msg) from exc
        state = attach_documents(state, docs)
        doc_ids = tuple(doc.id for doc in docs)

    terminal_f1: float | None = None
    if step.kind is ActionKind.ANSWER:
        terminal_f1 = f1_score(step.payload, golden_answers)
        value = terminal_f1
    else:
        value = _score_state(state, golden_answers, backend, cfg, seed)

    child = TreeNode(
        node_id=child_id,
        state=state,
        parent_id=node.node_id,
        terminal_f1=terminal_f1,
        expansion_value=value,
        doc_ids=doc_ids,
    )
    node.children.append(child)
    return child


def backpropagate(path: Sequence[TreeNode], v: float, steps: int, alpha: float) -> None:
    """Record ``(v, steps)`` on every node of ``path`` and refresh Q."""
    if not 0.0 <= v <= 1.0:
        msg = f"v must lie in [0, 1], got {v}"
        raise ValueError(msg)
    if steps < 1:
        msg = f"steps must be >= 1, got {steps}"
        raise ValueError(msg)
    sample = Sample(v=v, steps=steps)
    for node in path:
        node.samples.append(sample)
        node.visit_count += 1
        node.q_value = discounted_mean(node.samples, alpha)


def annotate_question(
    question: str,
    golden_answers: Sequence[str],
    backend: PolicyBackend,
    retriever: Retriever,
    cfg: MctsConfig,
) -> TreeNode:
    """Grow a search tree for ``question`` over ``cfg.iterations`` rounds.

    Each round descends by UCT to an expandable node or a leaf, expands once
    and backpropagates the child's value with its trajectory length. A leaf
    that cannot expand (terminal, depth-capped or failed) backpropagates its
    own value again instead.

    Raises:
        AnnotationFailed: The root could not produce a single child.
    """
    root = TreeNode(node_id=ROOT_ID, state=AgentState(question=question))
    for iteration in range(cfg.iterations):
        path = [root]
        node = root
        while not is_expandable(node, cfg) and node.children:
            node = select_child(node, cfg.c_uct)
            path.append(node)

        if not is_expandable(node, cfg):
            backpropagate(path, node.expansion_value, max(node.depth, 1), cfg.alpha)
            continue

        try:
            child = expand(node, backend, retriever, golden_answers, cfg)
        except ExpansionFailed as exc:
            if node is root and not root.children:
                msg = f"cannot expand the root of {question!r}: {exc}"
                raise AnnotationFailed(msg) from exc
            logger.warning("Iteration %d: %s", iteration + 1, exc)
            node.exhausted = True
            backpropagate(path, cfg.judge_fallback_v, max(node.depth, 1), cfg.alpha)
            continue

        path.append(child)
        backpropagate(path, child.expansion_value, child.depth, cfg.alpha)
    return root


@dataclass(frozen=True)
class Annotation:
    """Outcome of annotating one question."""

    record: GoldRecord
    root: TreeNode | None
    error: str | None = None


def _annotate_item(
    record: GoldRecord,
    backend: PolicyBackend,
    retriever: Retriever,
    cfg: MctsConfig,
) -> Annotation:
    try:
        root = annotate_question(
            record.question, record.golden_answers, backend, retriever, cfg
        )
    except AnnotationFailed as exc:
        logger.warning("Annotation failed for %s: %s", record.id, exc)
        return Annotation(record=record, root=None, error=str(exc))
    return Annotation(record=record, root=root)


def annotate_batch(
    records: Sequence[GoldRecord],
    backend: PolicyBackend,
    retriever: Retriever,
    cfg: MctsConfig,
    *,
    parallelism: int = 1,
) -> list[Annotation]:
    """Annotate distinct questions concurrently; output follows input order."""
    if parallelism < 1:
        msg = f"parallelism must be >= 1, got {parallelism}"
        raise ValueError(msg)
    with ThreadPoolExecutor(max_workers=parallelism) as executor:
        return list(
            executor.map(lambda record: _annotate_item(record, backend, retriever, cfg), records)
        )


__all__ = [
    "AnnotationFailed",
    "Annotation",
    "ExpansionFailed",
    "NoChildren",
    "annotate_batch",
    "annotate_question",
    "backpropagate",
    "expand",
    "is_expandable",
    "select_child",
    "uct_score",
]
