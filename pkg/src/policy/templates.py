"""System prompt templates shipped as plain-text resources."""

from __future__ import annotations

from enum import Enum
from functools import cache
from importlib import resources

from pydantic import BaseModel, ConfigDict

from agent.models import Stage

ANSWER_FORMAT_SLOT = "{answer_format}"
DEFAULT_ANSWER_FORMAT = "answer"


class TemplateName(str, Enum):
    REASONING = "reasoning"
    GROUNDING = "grounding"
    PROCESS_EVALUATION = "process_evaluation"


class PromptTemplate(BaseModel):
    """A system prompt; only the reasoning template has a substitution slot."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: TemplateName
    system_text: str
    answer_format_slot: str | None = None

    def render(self, answer_format: str = DEFAULT_ANSWER_FORMAT) -> str:
        if self.answer_format_slot is None:
            return self.system_text
        return self.system_text.replace(self.answer_format_slot, answer_format)


def resource_text(name: TemplateName) -> str:
    """Raw text of the checked-in resource for ``name``."""
    path = resources.files("policy").joinpath("prompts", f"{name.value}.txt")
    return path.read_text(encoding="utf-8")


@cache
def load_template(name: TemplateName) -> PromptTemplate:
    text = resource_text(name)
    slot = ANSWER_FORMAT_SLOT if name is TemplateName.REASONING else None
    return PromptTemplate(name=name, system_text=text, answer_format_slot=slot)


def template_for_stage(stage: Stage) -> TemplateName:
    """Reasoning prompt for the reasoning stage, grounding prompt otherwise."""
    if stage is Stage.REASONING:
        return TemplateName.REASONING
    if stage is Stage.GROUNDING:
        return TemplateName.GROUNDING
    msg = "terminal states have no policy prompt"
    raise ValueError(msg)


__all__ = [
    "ANSWER_FORMAT_SLOT",
    "DEFAULT_ANSWER_FORMAT",
    "PromptTemplate",
    "TemplateName",
    "load_template",
    "resource_text",
    "template_for_stage",
]
