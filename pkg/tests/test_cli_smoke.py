from __future__ import annotations

import json
from pathlib import Path

import pytest

from cli import main
from conftest import CORPUS_DOCS, FixedRetriever, answer, write_demo_workspace, write_jsonl
from contract.artifacts import PAIRS_JSONL, SWEEP_CSV, SWEEP_JSON, TRANSCRIPTS_JSONL, TREES_DIR
from inference.engine import InferenceConfig, run
from inference.transcripts import save_transcripts
from policy.scripted import ScriptedBackend
from settings.runtime import default_index_path


def _config_args(config: Path) -> list[str]:
    return ["--config", str(config)]


def test_index_reports_document_count(
    corpus_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    exit_code = main(["index", str(corpus_path)])

    assert exit_code == 0
    assert capsys.readouterr().out == "indexed 3 documents\n"
    assert default_index_path(corpus_path).is_file()


def test_index_rerun_is_byte_identical(corpus_path: Path, tmp_path: Path) -> None:
    first, second = tmp_path / "a.json", tmp_path / "b.json"

    assert main(["index", str(corpus_path), "--out", str(first)]) == 0
    assert main(["index", str(corpus_path), "--out", str(second)]) == 0

    assert first.read_bytes() == second.read_bytes()


def test_index_duplicate_id_is_input_error(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    path = tmp_path / "corpus.jsonl"
    write_jsonl(path, [*CORPUS_DOCS, CORPUS_DOCS[0]])

    exit_code = main(["index", str(path)])

    assert exit_code == 2
    assert "line 4" in capsys.readouterr().err


def test_index_missing_corpus(tmp_path: Path) -> None:
    assert main(["index", str(tmp_path / "missing.jsonl")]) == 2


def test_annotate_writes_trees_and_pairs(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    ws = write_demo_workspace(tmp_path / "ws", 2)

    exit_code = main(["annotate", str(ws.questions), *_config_args(ws.config)])

    assert exit_code == 0
    assert capsys.readouterr().out.startswith("annotated 2/2 questions, ")
    assert len(list((ws.out / TREES_DIR).glob("*.json"))) == 2
    assert (ws.out / PAIRS_JSONL).read_text(encoding="utf-8").count("\n") >= 1


def test_annotate_unanswerable_questions_exit_partial(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    ws = write_demo_workspace(tmp_path / "ws", 2, iterations=4, answerable=False)

    exit_code = main(["annotate", str(ws.questions), *_config_args(ws.config)])

    assert exit_code == 1
    assert capsys.readouterr().out == "annotated 0/2 questions, 0 pairs\n"


def test_annotate_missing_questions_file(tmp_path: Path) -> None:
    ws = write_demo_workspace(tmp_path / "ws", 1)

    assert main(["annotate", str(tmp_path / "nope.jsonl"), *_config_args(ws.config)]) == 2


def test_bad_config_is_input_error(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    ws = write_demo_workspace(tmp_path / "ws", 1)
    ws.config.write_text("[mcts]\nalpha = 7\n", encoding="utf-8")

    exit_code = main(["infer", str(ws.questions), *_config_args(ws.config)])

    assert exit_code == 2
    assert capsys.readouterr().err.startswith("error: Invalid config")


def test_infer_blank_question_is_input_error(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    ws = write_demo_workspace(tmp_path / "ws", 1)
    write_jsonl(ws.questions, [{"id": "q00", "question": "   ", "golden_answers": ["x"]}])

    exit_code = main(["infer", str(ws.questions), *_config_args(ws.config)])

    assert exit_code == 2
    assert "line 1" in capsys.readouterr().err
    assert not (ws.out / TRANSCRIPTS_JSONL).exists()


def test_infer_then_eval(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    ws = write_demo_workspace(tmp_path / "ws", 2)

    assert main(["infer", str(ws.questions), *_config_args(ws.config)]) == 0
    assert capsys.readouterr().out == "wrote 2 transcripts (0 failed)\n"

    exit_code = main(["eval", str(ws.out / TRANSCRIPTS_JSONL), *_config_args(ws.config)])

    assert exit_code == 0
    assert capsys.readouterr().out == "EM 100.0 F1 100.0\n"


def test_infer_round_cap_override(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    ws = write_demo_workspace(tmp_path / "ws", 2)

    exit_code = main(
        ["infer", str(ws.questions), *_config_args(ws.config), "--max-rounds", "1"]
    )
    capsys.readouterr()
    main(["eval", str(ws.out / TRANSCRIPTS_JSONL), *_config_args(ws.config)])

    assert exit_code == 0
    assert capsys.readouterr().out == "EM 0.0 F1 0.0\n"
    records = [
        json.loads(line)
        for line in (ws.out / TRANSCRIPTS_JSONL).read_text(encoding="utf-8").splitlines()
    ]
    assert [record["rounds_used"] for record in records] == [1, 1]


def _write_eval_inputs(root: Path) -> tuple[Path, Path]:
    transcripts = [
        run(
            f"Question {question_id}?",
            ScriptedBackend(default=answer(prediction)),
            FixedRetriever([]),
            InferenceConfig(),
            question_id=question_id,
        )
        for question_id, prediction in (("q1", "Paris"), ("q2", "Berlin city wall"))
    ]
    transcripts_path = root / "transcripts.jsonl"
    golds_path = root / "golds.jsonl"
    save_transcripts(transcripts_path, transcripts)
    write_jsonl(
        golds_path,
        [
            {"id": "q1", "question": "Question q1?", "golden_answers": ["Paris"]},
            {"id": "q2", "question": "Question q2?", "golden_answers": ["Berlin"]},
        ],
    )
    return transcripts_path, golds_path


def test_eval_prints_percentages(
    tmp_path: Path, capsys: pytest.CaptureFixture[str], monkeypatch: pytest.MonkeyPatch
) -> None:
    monkeypatch.chdir(tmp_path)
    transcripts, golds = _write_eval_inputs(tmp_path)

    exit_code = main(["eval", str(transcripts), "--golds", str(golds)])

    assert exit_code == 0
    assert capsys.readouterr().out == "EM 50.0 F1 75.0\n"


def test_eval_missing_gold_is_input_error(
    tmp_path: Path, capsys: pytest.CaptureFixture[str], monkeypatch: pytest.MonkeyPatch
) -> None:
    monkeypatch.chdir(tmp_path)
    transcripts, golds = _write_eval_inputs(tmp_path)
    write_jsonl(golds, [{"id": "q1", "question": "Question q1?", "golden_answers": ["Paris"]}])

    exit_code = main(["eval", str(transcripts), "--golds", str(golds)])

    assert exit_code == 2
    assert "q2" in capsys.readouterr().err


def test_eval_empty_transcripts_is_input_error(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    monkeypatch.chdir(tmp_path)
    _, golds = _write_eval_inputs(tmp_path)
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")

    assert main(["eval", str(empty), "--golds", str(golds)]) == 2


def test_eval_without_gold_path(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    transcripts, _ = _write_eval_inputs(tmp_path)

    assert main(["eval", str(transcripts)]) == 2


def test_sweep_writes_csv_and_json(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    ws = write_demo_workspace(tmp_path / "ws", 2)

    exit_code = main(
        ["sweep", "rounds", str(ws.questions), "--values", "1", "3", *_config_args(ws.config)]
    )

    assert exit_code == 0
    assert capsys.readouterr().out.splitlines() == [
        "rounds=1 EM 0.0 F1 0.0 n=2",
        "rounds=3 EM 100.0 F1 100.0 n=2",
    ]
    assert (ws.out / SWEEP_CSV).read_text(encoding="utf-8") == (
        "value,em,f1,n\n1,0.0,0.0,2\n3,100.0,100.0,2\n"
    )
    assert json.loads((ws.out / SWEEP_JSON).read_text(encoding="utf-8"))["values"] == [1, 3]


def test_stats_prints_table(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    ws = write_demo_workspace(tmp_path / "ws", 2)
    main(["annotate", str(ws.questions), *_config_args(ws.config)])
    capsys.readouterr()

    exit_code = main(
        ["stats", str(ws.out / PAIRS_JSONL), "--trees", str(ws.out / TREES_DIR)]
    )

    out = capsys.readouterr().out
    assert exit_code == 0
    assert out.startswith("Questions")
    assert "Avg./Min./Med./Max. Iteration" in out
    assert "Source demo" in out


@pytest.mark.parametrize("command", ["index", "stats", "validate"])
def test_settings_free_commands_reject_config(tmp_path: Path, command: str) -> None:
    with pytest.raises(SystemExit) as excinfo:
        main([command, str(tmp_path / "input"), "--config", str(tmp_path / "stepwise.toml")])

    assert excinfo.value.code == 2


def test_stats_malformed_line(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    ws = write_demo_workspace(tmp_path / "ws", 1)
    main(["annotate", str(ws.questions), *_config_args(ws.config)])
    pairs = ws.out / PAIRS_JSONL
    first_line = pairs.read_text(encoding="utf-8").splitlines()[0]
    pairs.write_text(first_line + "\nnot json\n", encoding="utf-8")
    capsys.readouterr()

    exit_code = main(["stats", str(pairs)])

    assert exit_code == 2
    assert "line 2" in capsys.readouterr().err


def test_validate_and_verify_annotation_output(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    ws = write_demo_workspace(tmp_path / "ws", 2)
    main(["annotate", str(ws.questions), *_config_args(ws.config)])

    assert main(["validate", str(ws.out)]) == 0
    assert (
        main(
            [
                "verify",
                "annotate",
                str(ws.questions),
                "--artifacts-dir",
                str(ws.out),
                *_config_args(ws.config),
            ]
        )
        == 0
    )

    (ws.out / PAIRS_JSONL).write_text("", encoding="utf-8")
    capsys.readouterr()

    assert main(["validate", str(ws.out)]) == 1
    assert (
        main(
            [
                "verify",
                "annotate",
                str(ws.questions),
                "--artifacts-dir",
                str(ws.out),
                *_config_args(ws.config),
            ]
        )
        == 1
    )
    assert f"mismatches: {PAIRS_JSONL}" in capsys.readouterr().err


def test_verify_missing_artifacts_dir(tmp_path: Path) -> None:
    ws = write_demo_workspace(tmp_path / "ws", 1)

    exit_code = main(
        [
            "verify",
            "infer",
            str(ws.questions),
            "--artifacts-dir",
            str(tmp_path / "missing"),
            *_config_args(ws.config),
        ]
    )

    assert exit_code == 2


@pytest.mark.smoke
def test_demo_pipeline_end_to_end(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    ws = write_demo_workspace(tmp_path / "demo", 20)
    config = _config_args(ws.config)
    infer_dir = tmp_path / "demo" / "infer"

    assert main(["index", str(ws.corpus)]) == 0
    assert main(["annotate", str(ws.questions), *config]) == 0
    assert main(["validate", str(ws.out)]) == 0
    assert main(["infer", str(ws.questions), "--out-dir", str(infer_dir), *config]) == 0
    capsys.readouterr()
    assert main(["eval", str(infer_dir / TRANSCRIPTS_JSONL), *config]) == 0
    assert capsys.readouterr().out == "EM 100.0 F1 100.0\n"

    assert len(list((ws.out / TREES_DIR).glob("*.json"))) == 20
    assert main(["stats", str(ws.out / PAIRS_JSONL)]) == 0
    assert capsys.readouterr().out.startswith("Questions")
    assert (
        main(
            [
                "verify",
                "infer",
                str(ws.questions),
                "--artifacts-dir",
                str(infer_dir),
                *config,
            ]
        )
        == 0
    )


def test_distractor_policy_scores_lower(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    ws = write_demo_workspace(tmp_path / "ws", 3)
    ws.script.write_text(json.dumps({"default": answer("Nowhere")}), encoding="utf-8")

    assert main(["infer", str(ws.questions), *_config_args(ws.config)]) == 0
    capsys.readouterr()
    assert main(["eval", str(ws.out / TRANSCRIPTS_JSONL), *_config_args(ws.config)]) == 0

    assert capsys.readouterr().out == "EM 0.0 F1 0.0\n"


def test_stats_of_empty_pairs_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    pairs = tmp_path / "pairs.jsonl"
    pairs.write_text("", encoding="utf-8")

    exit_code = main(["stats", str(pairs)])

    out = capsys.readouterr().out
    assert exit_code == 0
    assert out.splitlines()[0].split() == ["Questions", "0"]
    assert out.splitlines()[1].split() == ["Pairs", "0"]
