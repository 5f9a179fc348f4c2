from __future__ import annotations

import json
from pathlib import Path

import pytest

from conftest import FixedRetriever, answer, grow, make_root, query, score
from mcts.dump import TreeFormatError, dump_tree, load_tree, tree_record
from mcts.search import annotate_question
from mcts.tree import MctsConfig, TreeNode
from policy.scripted import ScriptedBackend, ScriptRule
from policy.templates import TemplateName
from retrieval.models import Document

QUESTION = "What is the capital of France?"


def _annotated(paris_doc: Document) -> TreeNode:
    backend = ScriptedBackend(
        rules=[
            ScriptRule(
                template=TemplateName.GROUNDING,
                reply="<evidence>Paris is the capital of France</evidence>",
            ),
            ScriptRule(template=TemplateName.PROCESS_EVALUATION, reply=score(0.4)),
            ScriptRule(template=TemplateName.REASONING, reply=(query("France"), answer("Paris"))),
        ]
    )
    return annotate_question(
        QUESTION,
        ("Paris",),
        backend,
        FixedRetriever([paris_doc]),
        MctsConfig(iterations=10, max_children=2),
    )


def test_dump_and_load_preserve_every_node(paris_doc: Document, tmp_path: Path) -> None:
    root = _annotated(paris_doc)
    path = tmp_path / "q1.json"

    dump_tree(path, root, question_id="q1", golden_answers=["Paris"], source="demo")
    loaded = load_tree(path)

    assert loaded.question_id == "q1"
    assert loaded.question == QUESTION
    assert loaded.golden_answers == ("Paris",)
    assert loaded.source == "demo"
    pairs = list(zip(root.walk(), loaded.root.walk(), strict=True))
    assert len(pairs) > 1
    for original, rebuilt in pairs:
        assert rebuilt.node_id == original.node_id
        assert rebuilt.parent_id == original.parent_id
        assert rebuilt.state.steps == original.state.steps
        assert rebuilt.visit_count == original.visit_count
        assert rebuilt.q_value == original.q_value
        assert rebuilt.samples == original.samples
        assert rebuilt.terminal_f1 == original.terminal_f1
        assert rebuilt.expansion_value == original.expansion_value
        assert rebuilt.doc_ids == original.doc_ids
        assert rebuilt.exhausted == original.exhausted


def test_dump_is_byte_stable(paris_doc: Document, tmp_path: Path) -> None:
    first, second = tmp_path / "a.json", tmp_path / "b.json"

    dump_tree(first, _annotated(paris_doc), question_id="q1", golden_answers=["Paris"])
    dump_tree(second, _annotated(paris_doc), question_id="q1", golden_answers=["Paris"])

    assert first.read_bytes() == second.read_bytes()


def test_node_record_layout() -> None:
    root = make_root()
    child = grow(root, query("capital of France"), q=0.25, n=2)
    child.doc_ids = ("d1",)
    grow(root, answer("Paris"), q=0.9, n=1).terminal_f1 = 1.0

    record = tree_record(root, question_id="q1", golden_answers=["Paris"])

    assert [node["id"] for node in record["nodes"]] == ["0", "0.0", "0.1"]
    assert record["nodes"][0]["action"] is None
    assert record["nodes"][1]["action"] == {
        "kind": "query",
        "payload": "capital of France",
        "raw_text": query("capital of France"),
        "doc_ids": ["d1"],
    }
    assert record["nodes"][1]["stage"] == "grounding"
    assert record["nodes"][1]["N"] == 2
    assert "terminal_f1" not in record["nodes"][1]
    assert record["nodes"][2]["terminal_f1"] == 1.0


def _write_tree(tmp_path: Path, root: TreeNode) -> Path:
    path = tmp_path / "tree.json"
    dump_tree(path, root, question_id="q1", golden_answers=["Paris"])
    return path


def test_load_rejects_stage_mismatch(tmp_path: Path) -> None:
    root = make_root()
    grow(root, answer("Paris"))
    path = _write_tree(tmp_path, root)
    record = json.loads(path.read_text(encoding="utf-8"))
    record["nodes"][1]["stage"] = "reasoning"
    path.write_text(json.dumps(record), encoding="utf-8")

    with pytest.raises(TreeFormatError, match="stage"):
        load_tree(path)


def test_load_rejects_missing_root(tmp_path: Path) -> None:
    path = tmp_path / "tree.json"
    path.write_text(
        json.dumps({"id": "q1", "question": "q", "golden_answers": [], "nodes": []}),
        encoding="utf-8",
    )

    with pytest.raises(TreeFormatError, match="root"):
        load_tree(path)


def test_load_rejects_illegal_action(tmp_path: Path) -> None:
    root = make_root()
    grow(root, answer("Paris"))
    path = _write_tree(tmp_path, root)
    record = json.loads(path.read_text(encoding="utf-8"))
    record["nodes"][1]["action"]["kind"] = "evidence"
    path.write_text(json.dumps(record), encoding="utf-8")

    with pytest.raises(TreeFormatError):
        load_tree(path)


def test_load_rejects_invalid_json(tmp_path: Path) -> None:
    path = tmp_path / "tree.json"
    path.write_text("{", encoding="utf-8")

    with pytest.raises(TreeFormatError):
        load_tree(path)
