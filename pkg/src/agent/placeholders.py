"""Placeholder grammar: parse model responses, render states into prompts.

Tags are exact and case-sensitive: ``<query>``, ``<evidence>``, ``<answer>``
with matching closers. A placeholder is well-formed when the next tag token
after its opener is its own closer. A tag opened inside another placeholder,
or a closer that does not match the open tag, makes the response malformed.
"""

from __future__ import annotations

import re

from agent.models import SOURCE_STAGE, ActionKind, ActionStep, AgentState, Stage

_TAG_RE = re.compile(r"<(/?)(query|evidence|answer)>")


class MalformedAction(Exception):
    """Raised when a response holds no legal, well-formed placeholder."""

    def __init__(self, message: str, raw_text: str) -> None:
        self.raw_text = raw_text
        super().__init__(message)


def legal_kinds(stage: Stage) -> frozenset[ActionKind]:
    """Action kinds that may be emitted from ``stage``."""
    return frozenset(kind for kind, source in SOURCE_STAGE.items() if source is stage)


def parse_action(raw: str, expected_stage: Stage, *, index: int = 0) -> ActionStep:
    """Extract the first legal placeholder for ``expected_stage`` from ``raw``.

    Later placeholders in the same response are ignored. Stray closers
    outside any placeholder are skipped.

    Raises:
        MalformedAction: No well-formed placeholder legal for the stage, the
            only candidates have empty payloads, or a tag is nested in or
            interleaved with the placeholder being read.
    """
    allowed = legal_kinds(expected_stage)
    if not allowed:
        msg = f"no action is legal from the {expected_stage.value} stage"
        raise MalformedAction(msg, raw)

    opener: re.Match[str] | None = None
    for token in _TAG_RE.finditer(raw):
        closing, name = token.group(1), token.group(2)
        if not closing:
            if opener is not None:
                msg = f"<{name}> nested inside <{opener.group(2)}>"
                raise MalformedAction(msg, raw)
            opener = token
            continue
        if opener is None:
            continue
        if name != opener.group(2):
            msg = f"</{name}> closes <{opener.group(2)}>"
            raise MalformedAction(msg, raw)
        kind = ActionKind(name)
        payload = raw[opener.end() : token.start()].strip()
        opener = None
        if kind in allowed and payload:
            return ActionStep(kind=kind, raw_text=raw, payload=payload, index=index)

    expected = "/".join(sorted(kind.value for kind in allowed))
    msg = f"no well-formed <{expected}> placeholder in response"
    raise MalformedAction(msg, raw)


def render_context(state: AgentState) -> str:
    """Serialize a state into prompt user content.

    Blocks are separated by a blank line: the question, each step's raw text
    in order, then (grounding only) the pending documents numbered from 1.
    """
    blocks = [f"Question: {state.question}"]
    blocks.extend(step.raw_text for step in state.steps)
    if state.stage is Stage.GROUNDING:
        blocks.extend(
            f"Doc {number}: {doc.title}\n{doc.contents}"
            for number, doc in enumerate(state.pending_docs, start=1)
        )
    return "\n\n".join(blocks)


__all__ = ["MalformedAction", "legal_kinds", "parse_action", "render_context"]
