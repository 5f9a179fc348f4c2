"""LLM-judge scoring of partial trajectories."""

from __future__ import annotations

import logging
import re
from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, Field

from policy.backends import PolicyRequest
from policy.templates import TemplateName, load_template

if TYPE_CHECKING:
    from collections.abc import Sequence

    from agent.models import AgentState
    from policy.backends import PolicyBackend

logger = logging.getLogger(__name__)

_SCORE_RE = re.compile(
    r"So the score is\s*\[?\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+))\s*\]?", re.IGNORECASE
)


class UnparsableScore(Exception):
    """Raised when a judge reply carries no trailing score clause."""

    def __init__(self, raw_reply: str) -> None:
        self.raw_reply = raw_reply
        super().__init__(f"no score clause in judge reply: {raw_reply[-80:]!r}")


class JudgeScore(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    value: float = Field(ge=0.0, le=1.0)
    raw_reply: str


def normalize_score(value: float) -> float:
    """Map a raw judge number onto [0, 1].

    Values in [0, 1] are kept, values in (1, 100] are read as percentages,
    and the result is clamped.
    """
    if 1.0 < value <= 100.0:
        logger.warning("Judge score %s outside [0, 1]; rescaled to %s", value, value / 100.0)
        value /= 100.0
    return min(1.0, max(0.0, value))


def parse_score(reply: str) -> float:
    """Raw number from the last "So the score is" clause in ``reply``."""
    matches = _SCORE_RE.findall(reply)
    if not matches:
        raise UnparsableScore(reply)
    return float(matches[-1])


def judge_content(state: AgentState, golden_answers: Sequence[str]) -> str:
    thoughts = "\n".join(step.raw_text for step in state.steps)
    return (
        f"Question: {state.question}\n\n"
        f"Golden Answers: {'; '.join(golden_answers)}\n\n"
        f"Agent Thoughts:\n{thoughts}"
    )


def judge_evaluate(
    state: AgentState,
    golden_answers: Sequence[str],
    backend: PolicyBackend,
    *,
    max_output_tokens: int = 512,
    seed: int | None = None,
) -> JudgeScore:
    """Score the trajectory in ``state`` against the golden answers.

    Judge calls always run at temperature 0.

    Raises:
        UnparsableScore: The reply has no score clause.
    """
    if not state.steps:
        msg = "judge_evaluate needs a state with at least one step"
        raise ValueError(msg)
    request = PolicyRequest(
        template=TemplateName.PROCESS_EVALUATION,
        system=load_template(TemplateName.PROCESS_EVALUATION).render(),
        user=judge_content(state, golden_answers),
        temperature=0.0,
        max_output_tokens=max_output_tokens,
        seed=seed,
    )
    reply = backend.complete(request)
    return JudgeScore(value=normalize_score(parse_score(reply)), raw_reply=reply)


__all__ = [
    "JudgeScore",
    "UnparsableScore",
    "judge_content",
    "judge_evaluate",
    "normalize_score",
    "parse_score",
]
