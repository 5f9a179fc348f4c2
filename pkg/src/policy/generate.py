"""Stage-conditioned action sampling."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from agent.models import Stage
from agent.placeholders import MalformedAction, parse_action, render_context
from policy.backends import PolicyRequest
from policy.templates import DEFAULT_ANSWER_FORMAT, load_template, template_for_stage

if TYPE_CHECKING:
    from agent.models import ActionStep, AgentState
    from policy.backends import PolicyBackend

logger = logging.getLogger(__name__)

DEFAULT_MALFORMED_RETRIES = 2


def build_request(
    state: AgentState,
    *,
    answer_format: str = DEFAULT_ANSWER_FORMAT,
    temperature: float = 0.0,
    max_output_tokens: int = 512,
    seed: int | None = None,
) -> PolicyRequest:
    """Request for the next action: the stage's template plus the rendered state."""
    name = template_for_stage(state.stage)
    return PolicyRequest(
        template=name,
        system=load_template(name).render(answer_format),
        user=render_context(state),
        temperature=temperature,
        max_output_tokens=max_output_tokens,
        seed=seed,
    )


def generate_action(
    state: AgentState,
    backend: PolicyBackend,
    *,
    answer_format: str = DEFAULT_ANSWER_FORMAT,
    temperature: float = 0.0,
    max_output_tokens: int = 512,
    seed: int | None = None,
    malformed_retries: int = DEFAULT_MALFORMED_RETRIES,
) -> ActionStep:
    """Sample and parse one action for ``state``.

    A malformed reply is re-requested up to ``malformed_retries`` times; the
    last :class:`MalformedAction` is raised once the budget is spent. Backend
    errors propagate unchanged.
    """
    if state.stage is Stage.TERMINAL:
        msg = "cannot sample an action from a terminal state"
        raise ValueError(msg)
    if malformed_retries < 0:
        msg = f"malformed_retries must be >= 0, got {malformed_retries}"
        raise ValueError(msg)

    request = build_request(
        state,
        answer_format=answer_format,
        temperature=temperature,
        max_output_tokens=max_output_tokens,
        seed=seed,
    )
    index = len(state.steps)
    for attempt in range(malformed_retries + 1):
        raw = backend.complete(request)
        try:
            return parse_action(raw, state.stage, index=index)
        except MalformedAction:
            if attempt == malformed_retries:
                raise
            logger.warning(
                "Malformed %s reply (attempt %d/%d): %.80r",
                state.stage.value,
                attempt + 1,
                malformed_retries + 1,
                raw,
            )
    raise AssertionError("unreachable")


__all__ = ["DEFAULT_MALFORMED_RETRIES", "build_request", "generate_action"]
