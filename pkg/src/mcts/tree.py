"""Search tree nodes and annotation settings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, Field

from policy.generate import DEFAULT_MALFORMED_RETRIES
from policy.templates import DEFAULT_ANSWER_FORMAT
from retrieval.bm25 import DEFAULT_TOP_K

if TYPE_CHECKING:
    from collections.abc import Iterator

    from agent.models import ActionStep, AgentState, Stage

ROOT_ID = "0"


class MctsConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    c_uct: float = Field(default=math.sqrt(2), gt=0)
    alpha: float = Field(default=0.9, gt=0, le=1)
    max_children: int = Field(default=3, ge=1)
    iterations: int = Field(default=24, ge=1)
    max_depth: int = Field(default=12, ge=1)
    judge_fallback_v: float = Field(default=0.0, ge=0, le=1)
    top_k: int = Field(default=DEFAULT_TOP_K, ge=1)
    temperature: float = Field(default=0.7, ge=0)
    max_output_tokens: int = Field(default=512, gt=0)
    answer_format: str = DEFAULT_ANSWER_FORMAT
    seed: int | None = None
    malformed_retries: int = Field(default=DEFAULT_MALFORMED_RETRIES, ge=0)


@dataclass(frozen=True)
class Sample:
    """One backpropagated value and the trajectory length it came from."""

    v: float
    steps: int


def discounted_mean(samples: list[Sample], alpha: float) -> float:
    """Mean of ``v * alpha**steps`` over ``samples`` (0 when empty)."""
    if not samples:
        return 0.0
    return math.fsum(s.v * alpha**s.steps for s in samples) / len(samples)


@dataclass
class TreeNode:
    """A search node. Only the annotator that owns the tree mutates it."""

    node_id: str
    state: AgentState
    parent_id: str | None = None
    visit_count: int = 0
    q_value: float = 0.0
    children: list[TreeNode] = field(default_factory=list)
    samples: list[Sample] = field(default_factory=list)
    terminal_f1: float | None = None
    expansion_value: float = 0.0
    doc_ids: tuple[str, ...] = ()
    exhausted: bool = False

    @property
    def stage(self) -> Stage:
        return self.state.stage

    @property
    def depth(self) -> int:
        return len(self.state.steps)

    @property
    def action(self) -> ActionStep | None:
        """The step that created this node (None at the root)."""
        return self.state.steps[-1] if self.state.steps else None

    def child_id(self) -> str:
        return f"{self.node_id}.{len(self.children)}"

    def walk(self) -> Iterator[TreeNode]:
        """Pre-order traversal, children in creation order."""
        yield self
        for child in self.children:
            yield from child.walk()


__all__ = ["ROOT_ID", "MctsConfig", "Sample", "TreeNode", "discounted_mean"]
