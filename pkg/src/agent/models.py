"""Domain types for the three-stage agent.

A state is the question, the ordered steps taken so far and the stage they
leave the agent in. All models are frozen; sequences are tuples so a value
can be shared between concurrent runs without copying.
"""

from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from retrieval.models import Document

NO_EVIDENCE = "None"


class Stage(str, Enum):
    """Decision mode of the agent."""

    REASONING = "reasoning"
    GROUNDING = "grounding"
    TERMINAL = "terminal"


class ActionKind(str, Enum):
    """What a single model response does."""

    QUERY = "query"
    EVIDENCE = "evidence"
    ANSWER = "answer"


# Stage each action kind may be emitted from.
SOURCE_STAGE: dict[ActionKind, Stage] = {
    ActionKind.QUERY: Stage.REASONING,
    ActionKind.ANSWER: Stage.REASONING,
    ActionKind.EVIDENCE: Stage.GROUNDING,
}

# Stage the agent is in after an action of this kind.
TARGET_STAGE: dict[ActionKind, Stage] = {
    ActionKind.QUERY: Stage.GROUNDING,
    ActionKind.ANSWER: Stage.TERMINAL,
    ActionKind.EVIDENCE: Stage.REASONING,
}


class ActionStep(BaseModel):
    """One parsed model response."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ActionKind
    raw_text: str
    payload: str = Field(min_length=1)
    index: int = Field(default=0, ge=0)


def stage_after(steps: tuple[ActionStep, ...]) -> Stage:
    """Return the stage implied by the last step (Reasoning when empty)."""
    if not steps:
        return Stage.REASONING
    return TARGET_STAGE[steps[-1].kind]


class AgentState(BaseModel):
    """Search/inference state: question, prior steps, stage, pending docs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    question: str
    steps: tuple[ActionStep, ...] = ()
    stage: Stage = Stage.REASONING
    pending_docs: tuple[Document, ...] = ()

    @model_validator(mode="after")
    def check_invariants(self) -> AgentState:
        for position, step in enumerate(self.steps):
            if step.index != position:
                msg = f"step indices must be consecutive from 0; got {step.index} at {position}"
                raise ValueError(msg)
        expected = stage_after(self.steps)
        if self.stage is not expected:
            msg = f"stage {self.stage.value} does not follow from the last step ({expected.value} expected)"
            raise ValueError(msg)
        if self.pending_docs and self.stage is not Stage.GROUNDING:
            msg = "pending_docs are only legal in the grounding stage"
            raise ValueError(msg)
        return self


class Retrieval(BaseModel):
    """A query issued during a run and the documents it returned."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    query: str
    doc_ids: tuple[str, ...] = ()
    docs: tuple[Document, ...] = ()

    @model_validator(mode="after")
    def check_ids(self) -> Retrieval:
        if self.docs and tuple(doc.id for doc in self.docs) != self.doc_ids:
            msg = "doc_ids must list the ids of docs in order"
            raise ValueError(msg)
        return self

    @classmethod
    def of(cls, query: str, docs: tuple[Document, ...], *, keep_docs: bool = True) -> Retrieval:
        """Record a retrieval; without ``keep_docs`` only the ids are kept."""
        return cls(
            query=query,
            doc_ids=tuple(doc.id for doc in docs),
            docs=docs if keep_docs else (),
        )


class Transcript(BaseModel):
    """Record of one inference run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    question: str
    question_id: str | None = None
    steps: tuple[ActionStep, ...] = ()
    retrievals: tuple[Retrieval, ...] = ()
    final_answer: str | None = None
    rounds_used: int = Field(default=0, ge=0)
    error: str | None = None

    @model_validator(mode="after")
    def check_invariants(self) -> Transcript:
        answered = bool(self.steps) and self.steps[-1].kind is ActionKind.ANSWER
        if answered != (self.final_answer is not None):
            msg = "final_answer must be present exactly when the last step is an answer"
            raise ValueError(msg)
        queries = sum(1 for step in self.steps if step.kind is ActionKind.QUERY)
        # A failed retrieval leaves its query step without a result.
        allowed = {queries, queries - 1} if self.error is not None else {queries}
        if len(self.retrievals) not in allowed:
            msg = f"{queries} query steps but {len(self.retrievals)} retrievals"
            raise ValueError(msg)
        return self

    @property
    def key(self) -> str:
        """Identifier used to look up gold answers."""
        return self.question_id if self.question_id is not None else self.question


__all__ = [
    "NO_EVIDENCE",
    "SOURCE_STAGE",
    "TARGET_STAGE",
    "ActionKind",
    "ActionStep",
    "AgentState",
    "Retrieval",
    "Stage",
    "Transcript",
    "stage_after",
]
