"""Stage transitions: Reasoning -> Grounding -> Reasoning ... -> Terminal."""

from __future__ import annotations

from typing import TYPE_CHECKING

from agent.models import SOURCE_STAGE, TARGET_STAGE, ActionStep, AgentState, Stage

if TYPE_CHECKING:
    from collections.abc import Iterable

    from retrieval.models import Document


class IllegalTransition(Exception):
    """Raised when a step kind is not legal for the current stage."""


def transition(state: AgentState, step: ActionStep) -> AgentState:
    """Return the state after appending ``step``; ``state`` is not modified.

    The appended step is re-indexed to its position in the trajectory and
    pending documents are always cleared (a new query's documents are
    attached separately with :func:`attach_documents`).
    """
    if state.stage is Stage.TERMINAL:
        msg = "terminal states absorb every action"
        raise IllegalTransition(msg)
    if SOURCE_STAGE[step.kind] is not state.stage:
        msg = f"{step.kind.value} is not legal from the {state.stage.value} stage"
        raise IllegalTransition(msg)

    appended = step.model_copy(update={"index": len(state.steps)})
    return AgentState(
        question=state.question,
        steps=(*state.steps, appended),
        stage=TARGET_STAGE[step.kind],
    )


def attach_documents(state: AgentState, docs: Iterable[Document]) -> AgentState:
    """Return a grounding state carrying ``docs`` as its pending documents."""
    if state.stage is not Stage.GROUNDING:
        msg = f"documents can only be attached in the grounding stage, not {state.stage.value}"
        raise IllegalTransition(msg)
    return state.model_copy(update={"pending_docs": tuple(docs)})


def replay(question: str, steps: Iterable[ActionStep]) -> AgentState:
    """Rebuild a state by applying ``steps`` in order from the question."""
    state = AgentState(question=question)
    for step in steps:
        state = transition(state, step)
    return state


__all__ = ["IllegalTransition", "attach_documents", "replay", "transition"]
