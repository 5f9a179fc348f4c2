"""Sibling preference pairs extracted from annotated trees."""

from __future__ import annotations

import logging
from enum import Enum
from itertools import permutations
from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, model_validator

from agent.machine import replay
from agent.models import SOURCE_STAGE, ActionKind, ActionStep

if TYPE_CHECKING:
    from mcts.tree import TreeNode

logger = logging.getLogger(__name__)

DEFAULT_THETA = 0.01


class PairMode(str, Enum):
    """How sibling actions are paired."""

    BEST_WORST = "best_worst"
    ALL_ORDERED = "all_ordered"


class PreferencePair(BaseModel):
    """A chosen and a rejected step sharing one prefix."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    question: str
    prefix: tuple[ActionStep, ...]
    chosen: ActionStep
    rejected: ActionStep
    chosen_reward: float
    rejected_reward: float
    source: str = ""

    @model_validator(mode="after")
    def check_shape(self) -> PreferencePair:
        if self.chosen.raw_text == self.rejected.raw_text:
            msg = "chosen and rejected responses are identical"
            raise ValueError(msg)
        position = len(self.prefix)
        if self.chosen.index != position or self.rejected.index != position:
            msg = f"chosen and rejected must both sit at step {position}"
            raise ValueError(msg)
        stage = replay(self.question, self.prefix).stage
        for step in (self.chosen, self.rejected):
            if SOURCE_STAGE[step.kind] is not stage:
                msg = f"{step.kind.value} is not legal after the prefix ({stage.value})"
                raise ValueError(msg)
        return self

    @property
    def pair_type(self) -> tuple[ActionKind, ActionKind]:
        return (self.chosen.kind, self.rejected.kind)

    @property
    def gap(self) -> float:
        return self.chosen_reward - self.rejected_reward

    def dedupe_key(self) -> tuple[str, tuple[str, ...], str, str]:
        return (
            self.question,
            tuple(step.raw_text for step in self.prefix),
            self.chosen.raw_text,
            self.rejected.raw_text,
        )


def _candidates(children: list[TreeNode], mode: PairMode) -> list[tuple[TreeNode, TreeNode]]:
    if mode is PairMode.ALL_ORDERED:
        return list(permutations(children, 2))
    best = max(children, key=lambda child: child.q_value)
    worst = min(children, key=lambda child: child.q_value)
    if best is worst:
        return []
    return [(best, worst)]


def extract_pairs(
    root: TreeNode,
    theta: float = DEFAULT_THETA,
    mode: PairMode = PairMode.BEST_WORST,
    *,
    source: str = "",
) -> list[PreferencePair]:
    """Preference pairs between siblings of every node with two or more children.

    Pairs with identical responses or a Q gap below ``theta`` are dropped,
    as are repeats of an earlier pair. Nodes are visited in pre-order.
    """
    if theta <= 0:
        msg = f"theta must be > 0, got {theta}"
        raise ValueError(msg)

    pairs: list[PreferencePair] = []
    seen: set[tuple[str, tuple[str, ...], str, str]] = set()
    dropped_identical = dropped_gap = 0
    for node in root.walk():
        if len(node.children) < 2:
            continue
        for chosen, rejected in _candidates(node.children, mode):
            chosen_step, rejected_step = chosen.action, rejected.action
            assert chosen_step is not None and rejected_step is not None
            if chosen_step.raw_text == rejected_step.raw_text:
                dropped_identical += 1
                continue
            if chosen.q_value - rejected.q_value < theta:
                dropped_gap += 1
                continue
            pair = PreferencePair(
                question=node.state.question,
                prefix=node.state.steps,
                chosen=chosen_step,
                rejected=rejected_step,
                chosen_reward=chosen.q_value,
                rejected_reward=rejected.q_value,
                source=source,
            )
            key = pair.dedupe_key()
            if key in seen:
                continue
            seen.add(key)
            pairs.append(pair)
    logger.debug(
        "Extracted %d pairs (%d identical, %d under gap %s dropped)",
        len(pairs),
        dropped_identical,
        dropped_gap,
        theta,
    )
    return pairs


__all__ = ["DEFAULT_THETA", "PairMode", "PreferencePair", "extract_pairs"]
