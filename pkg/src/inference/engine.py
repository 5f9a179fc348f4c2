"""Iterative reasoning/grounding inference loop.

Each policy call consumes one round of the budget. A query step triggers a
retrieval whose documents become the pending context of the grounding step;
an answer step ends the run.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, Field

from agent.machine import attach_documents, transition
from agent.models import ActionKind, AgentState, Retrieval, Transcript
from agent.placeholders import MalformedAction
from errors import BackendUnavailable
from policy.generate import DEFAULT_MALFORMED_RETRIES, generate_action
from policy.templates import DEFAULT_ANSWER_FORMAT
from retrieval.bm25 import DEFAULT_TOP_K
from retrieval.remote import MalformedRetrievalReply

if TYPE_CHECKING:
    from collections.abc import Sequence

    from evaluation.golds import GoldRecord
    from policy.backends import PolicyBackend
    from retrieval.bm25 import Retriever

logger = logging.getLogger(__name__)


class InferenceConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    max_rounds: int = Field(default=10, ge=1)
    top_k: int = Field(default=DEFAULT_TOP_K, ge=1)
    answer_format: str = DEFAULT_ANSWER_FORMAT
    record_transcript: bool = True
    temperature: float = Field(default=0.0, ge=0)
    max_output_tokens: int = Field(default=512, gt=0)
    seed: int | None = None
    malformed_retries: int = Field(default=DEFAULT_MALFORMED_RETRIES, ge=0)


class PolicyFailure(Exception):
    """The policy could not produce a legal action; carries the partial run."""

    def __init__(self, message: str, transcript: Transcript) -> None:
        self.transcript = transcript
        super().__init__(message)


class RetrievalFailure(Exception):
    """The retriever failed on a query; carries the partial run."""

    def __init__(self, message: str, transcript: Transcript) -> None:
        self.transcript = transcript
        super().__init__(message)


class _Run:
    """Mutable bookkeeping for one run."""

    def __init__(self, question: str, question_id: str | None, record: bool) -> None:
        self.question = question
        self.question_id = question_id
        self.record = record
        self.state = AgentState(question=question)
        self.retrievals: list[Retrieval] = []
        self.rounds = 0

    def transcript(self, error: str | None = None) -> Transcript:
        steps = self.state.steps
        answered = bool(steps) and steps[-1].kind is ActionKind.ANSWER
        return Transcript(
            question=self.question,
            question_id=self.question_id,
            steps=steps,
            retrievals=tuple(self.retrievals),
            final_answer=steps[-1].payload if answered else None,
            rounds_used=self.rounds,
            error=error,
        )


def run(
    question: str,
    backend: PolicyBackend,
    retriever: Retriever,
    cfg: InferenceConfig,
    *,
    question_id: str | None = None,
) -> Transcript:
    """Answer ``question`` within ``cfg.max_rounds`` policy calls.

    An exhausted budget yields a transcript without ``final_answer``.

    Raises:
        PolicyFailure: Malformed replies past the retry budget, or an
            unavailable backend.
        RetrievalFailure: The retriever failed on a query step.
    """
    if not question.strip():
        msg = "question must be non-empty"
        raise ValueError(msg)

    current = _Run(question, question_id, cfg.record_transcript)
    while current.rounds < cfg.max_rounds:
        try:
            step = generate_action(
                current.state,
                backend,
                answer_format=cfg.answer_format,
                temperature=cfg.temperature,
                max_output_tokens=cfg.max_output_tokens,
                seed=cfg.seed,
                malformed_retries=cfg.malformed_retries,
            )
        except (MalformedAction, BackendUnavailable) as exc:
            error = f"policy: {exc}"
            raise PolicyFailure(error, current.transcript(error)) from exc
        current.rounds += 1
        current.state = transition(current.state, step)

        if step.kind is ActionKind.ANSWER:
            break
        if step.kind is ActionKind.QUERY:
            try:
                docs = retriever.retrieve(step.payload, cfg.top_k)
            except (BackendUnavailable, MalformedRetrievalReply) as exc:
                error = f"retrieval: {exc}"
                raise RetrievalFailure(error, current.transcript(error)) from exc
            current.state = attach_documents(current.state, docs)
            current.retrievals.append(
                Retrieval.of(step.payload, tuple(docs), keep_docs=current.record)
            )

    transcript = current.transcript()
    logger.debug(
        "Run %s finished after %d rounds (answered=%s)",
        transcript.key,
        transcript.rounds_used,
        transcript.final_answer is not None,
    )
    return transcript


def _run_item(
    item: GoldRecord | str,
    backend: PolicyBackend,
    retriever: Retriever,
    cfg: InferenceConfig,
) -> Transcript:
    if isinstance(item, str):
        question, question_id = item, None
    else:
        question, question_id = item.question, item.id
    try:
        return run(question, backend, retriever, cfg, question_id=question_id)
    except (PolicyFailure, RetrievalFailure) as exc:
        logger.warning("Inference failed for %s: %s", question_id or question, exc)
        return exc.transcript


def run_batch(
    questions: Sequence[GoldRecord | str],
    backend: PolicyBackend,
    retriever: Retriever,
    cfg: InferenceConfig,
    *,
    parallelism: int = 1,
) -> list[Transcript]:
    """Run every question with at most ``parallelism`` concurrent runs.

    Output order matches input order. A failed run is returned as its
    partial transcript with ``error`` set.
    """
    if parallelism < 1:
        msg = f"parallelism must be >= 1, got {parallelism}"
        raise ValueError(msg)
    with ThreadPoolExecutor(max_workers=parallelism) as executor:
        return list(
            executor.map(lambda item: _run_item(item, backend, retriever, cfg), questions)
        )


__all__ = [
    "InferenceConfig",
    "PolicyFailure",
    "RetrievalFailure",
    "run",
    "run_batch",
]
