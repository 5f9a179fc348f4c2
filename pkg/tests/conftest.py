"""Shared fixtures: reply builders, fake retrievers, hand-built trees and demo workspaces."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import pytest

from agent.machine import transition
from agent.models import AgentState
from agent.placeholders import parse_action
from mcts.tree import ROOT_ID, TreeNode
from retrieval.models import Document

CORPUS_DOCS: list[dict[str, object]] = [
    {"id": "d1", "title": "Paris", "contents": "Paris is the capital of France."},
    {"id": "d2", "title": "Berlin", "contents": "Berlin is the capital of Germany."},
    {
        "id": "d3",
        "title": "Mount Everest",
        "contents": "Mount Everest is the highest mountain on Earth.",
    },
]


def query(text: str) -> str:
    return f"So the next query is <query>{text}</query>."


def evidence(text: str) -> str:
    return f"Based on the query, the relevant evidence is <evidence>{text}</evidence>."


def answer(text: str) -> str:
    return f"So the answer is <answer>{text}</answer>."


def score(value: float | str) -> str:
    return f"The reasoning is mostly sound. So the score is [{value}]."


def write_jsonl(path: Path, records: list[dict[str, object]]) -> None:
    """Write a list of dicts as newline-delimited JSON."""
    lines = [json.dumps(record, sort_keys=True) for record in records]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class FixedRetriever:
    """Returns the same ranked documents for every query."""

    def __init__(self, docs: list[Document]) -> None:
        self.docs = docs
        self.queries: list[tuple[str, int]] = []

    def retrieve(self, query: str, k: int) -> list[Document]:
        self.queries.append((query, k))
        return list(self.docs[:k])


class FailingRetriever:
    def retrieve(self, query: str, k: int) -> list[Document]:
        from errors import BackendUnavailable

        msg = "retriever down"
        raise BackendUnavailable(msg)


def make_root(question: str = "What is the capital of France?") -> TreeNode:
    return TreeNode(node_id=ROOT_ID, state=AgentState(question=question))


def grow(parent: TreeNode, raw_text: str, *, q: float = 0.0, n: int = 1) -> TreeNode:
    """Attach a child created by ``raw_text`` with the given Q and visit count."""
    step = parse_action(raw_text, parent.stage, index=len(parent.state.steps))
    child = TreeNode(
        node_id=parent.child_id(),
        state=transition(parent.state, step),
        parent_id=parent.node_id,
        visit_count=n,
        q_value=q,
    )
    parent.children.append(child)
    return child


@pytest.fixture()
def corpus_path(tmp_path: Path) -> Path:
    path = tmp_path / "corpus.jsonl"
    write_jsonl(path, CORPUS_DOCS)
    return path


@pytest.fixture()
def paris_doc() -> Document:
    return Document(id="d1", title="Paris", contents="Paris is the capital of France.")


@dataclass(frozen=True)
class DemoWorkspace:
    root: Path
    corpus: Path
    questions: Path
    script: Path
    config: Path
    out: Path


def demo_questions(count: int) -> list[dict[str, object]]:
    return [
        {
            "id": f"q{i:02d}",
            "question": f"What is the capital of Country{i:02d}?",
            "golden_answers": [f"City{i:02d}"],
            "source": "demo",
        }
        for i in range(count)
    ]


def demo_corpus(count: int) -> list[dict[str, object]]:
    docs: list[dict[str, object]] = []
    for i in range(count):
        docs.extend(
            [
                {
                    "id": f"doc{i:02d}-capital",
                    "title": f"Country{i:02d}",
                    "contents": f"City{i:02d} is the capital of Country{i:02d}.",
                },
                {
                    "id": f"doc{i:02d}-people",
                    "title": f"Country{i:02d} people",
                    "contents": f"Country{i:02d} has a large population.",
                },
                {
                    "id": f"doc{i:02d}-river",
                    "title": f"River{i:02d}",
                    "contents": f"River{i:02d} flows through Country{i:02d}.",
                },
            ]
        )
    return docs


def demo_script(count: int, *, answerable: bool = True) -> dict[str, object]:
    """Rules answering each demo question after one retrieval.

    The first reply at a question's root is a query, the second a wrong
    answer, so every root gets two distinct children.
    """
    if not answerable:
        return {"default": query("nothing useful")}
    rules: list[dict[str, object]] = []
    for i in range(count):
        rules.append(
            {
                "template": "reasoning",
                "contains": [f"<evidence>City{i:02d}"],
                "reply": answer(f"City{i:02d}"),
            }
        )
        rules.append(
            {
                "template": "grounding",
                "contains": [f"City{i:02d} is the capital"],
                "reply": f"<evidence>City{i:02d} is the capital of Country{i:02d}</evidence>",
            }
        )
        rules.append(
            {
                "template": "reasoning",
                "contains": [f"Country{i:02d}"],
                "reply": [query(f"capital of Country{i:02d}"), answer("unknown")],
            }
        )
    rules.append({"template": "grounding", "reply": "<evidence>None</evidence>"})
    rules.append({"template": "process_evaluation", "reply": score(0.5)})
    return {"rules": rules}


def write_demo_workspace(
    root: Path,
    count: int,
    *,
    iterations: int = 8,
    answerable: bool = True,
) -> DemoWorkspace:
    root.mkdir(parents=True, exist_ok=True)
    corpus = root / "corpus.jsonl"
    questions = root / "questions.jsonl"
    script = root / "script.json"
    config = root / "stepwise.toml"
    write_jsonl(corpus, demo_corpus(count))
    write_jsonl(questions, demo_questions(count))
    script.write_text(json.dumps(demo_script(count, answerable=answerable)), encoding="utf-8")
    config.write_text(
        f"""
seed = 7

[backend]
kind = "scripted"
script_path = "script.json"

[retriever]
kind = "local"
corpus_path = "corpus.jsonl"
k = 3

[mcts]
iterations = {iterations}
max_children = 2

[dataset]
output_dir = "out"
source = "demo"

[eval]
gold_path = "questions.jsonl"
""".strip()
        + "\n",
        encoding="utf-8",
    )
    return DemoWorkspace(
        root=root,
        corpus=corpus,
        questions=questions,
        script=script,
        config=config,
        out=root / "out",
    )
