"""Agent domain types, stage machine and placeholder grammar."""

from agent.machine import IllegalTransition, attach_documents, replay, transition
from agent.models import (
    NO_EVIDENCE,
    ActionKind,
    ActionStep,
    AgentState,
    Retrieval,
    Stage,
    Transcript,
)
from agent.placeholders import MalformedAction, parse_action, render_context

__all__ = [
    "NO_EVIDENCE",
    "ActionKind",
    "ActionStep",
    "AgentState",
    "IllegalTransition",
    "MalformedAction",
    "Retrieval",
    "Stage",
    "Transcript",
    "attach_documents",
    "parse_action",
    "render_context",
    "replay",
    "transition",
]
