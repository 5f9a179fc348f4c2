from __future__ import annotations

from pathlib import Path

import orjson
import pytest

from conftest import answer, grow, make_root, query
from dataset.export import (
    DatasetMetadata,
    PairsFormatError,
    PairValidationError,
    export_dataset,
    load_metadata,
    load_pairs,
    metadata_path,
    pair_record,
)
from dataset.pairs import PairMode, PreferencePair, extract_pairs


def _pairs() -> list[PreferencePair]:
    root = make_root()
    searched = grow(root, query("France"), q=0.3)
    grounded = grow(searched, "<evidence>Paris is the capital</evidence>", q=0.5)
    grow(grounded, answer("Paris"), q=0.9)
    grow(grounded, answer("Lyon"), q=0.4)
    grow(grounded, query("capital city"), q=0.1)
    return extract_pairs(root, mode=PairMode.ALL_ORDERED, source="demo")


def _metadata(**overrides: object) -> DatasetMetadata:
    return DatasetMetadata.model_validate({"alpha": 0.9, "c_uct": 1.4, "iterations": 8, **overrides})


def test_export_round_trip(tmp_path: Path) -> None:
    pairs = _pairs()
    path = tmp_path / "pairs.jsonl"

    sidecar = export_dataset(pairs, path, metadata=_metadata())

    assert len(pairs) == 3
    assert sidecar == tmp_path / "pairs.meta.json"
    assert load_pairs(path) == pairs
    assert load_metadata(sidecar).pair_count == 3
    assert len(path.read_text(encoding="utf-8").splitlines()) == 3


def test_metadata_path() -> None:
    assert metadata_path(Path("out/pairs.jsonl")) == Path("out/pairs.meta.json")


def test_pair_record_layout() -> None:
    pair = _pairs()[0]

    assert pair_record(pair) == {
        "question": "What is the capital of France?",
        "prefix": [query("France"), "<evidence>Paris is the capital</evidence>"],
        "chosen": {"kind": "answer", "raw_text": answer("Paris"), "reward": 0.9},
        "rejected": {"kind": "answer", "raw_text": answer("Lyon"), "reward": 0.4},
        "pair_type": ["answer", "answer"],
        "source": "demo",
    }


def test_export_empty_dataset(tmp_path: Path) -> None:
    path = tmp_path / "pairs.jsonl"

    sidecar = export_dataset([], path, metadata=_metadata())

    assert path.read_bytes() == b""
    assert load_pairs(path) == []
    assert load_metadata(sidecar).pair_count == 0


def test_export_refuses_small_gap(tmp_path: Path) -> None:
    pairs = _pairs()
    path = tmp_path / "pairs.jsonl"

    with pytest.raises(PairValidationError):
        export_dataset(pairs, path, metadata=_metadata(theta=0.45))

    assert not path.exists()
    assert not metadata_path(path).exists()


def test_metadata_records_settings(tmp_path: Path) -> None:
    path = tmp_path / "pairs.jsonl"

    sidecar = export_dataset(
        _pairs(), path, metadata=_metadata(mode="all_ordered", dpo_beta=0.2)
    )
    meta = orjson.loads(sidecar.read_bytes())

    assert meta["mode"] == "all_ordered"
    assert meta["dpo_beta"] == 0.2
    assert meta["theta"] == 0.01
    assert meta["alpha"] == 0.9


def test_load_pairs_reports_bad_line(tmp_path: Path) -> None:
    path = tmp_path / "pairs.jsonl"
    export_dataset(_pairs(), path, metadata=_metadata())
    lines = path.read_text(encoding="utf-8").splitlines()
    lines[1] = lines[1].replace('"kind":"answer"', '"kind":"query"', 1)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    with pytest.raises(PairsFormatError) as excinfo:
        load_pairs(path)

    assert excinfo.value.line_number == 2


def test_load_pairs_reports_invalid_json(tmp_path: Path) -> None:
    path = tmp_path / "pairs.jsonl"
    export_dataset(_pairs(), path, metadata=_metadata())
    with path.open("a", encoding="utf-8") as handle:
        handle.write("{not json\n")

    with pytest.raises(PairsFormatError) as excinfo:
        load_pairs(path)

    assert excinfo.value.line_number == 4


def test_load_pairs_rejects_illegal_prefix(tmp_path: Path) -> None:
    path = tmp_path / "pairs.jsonl"
    record = pair_record(_pairs()[0])
    record["prefix"] = list(reversed(record["prefix"]))
    path.write_bytes(orjson.dumps(record) + b"\n")

    with pytest.raises(PairsFormatError) as excinfo:
        load_pairs(path)

    assert excinfo.value.line_number == 1
