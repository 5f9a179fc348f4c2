"""Command-line interface for stepwise-rag-core."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from artifacts.write import write_annotation_artifacts, write_inference_artifacts
from contract.artifacts import SWEEP_CSV, SWEEP_JSON
from contract.validation import validate_artifacts
from dataset.export import PairsFormatError, load_pairs
from dataset.stats import compute_stats, render_stats_table
from evaluation.golds import GoldFormatError, gold_map, load_golds
from evaluation.harness import EmptyEvaluation, MissingGold, evaluate_run
from evaluation.sweep import SweepAxis, sweep, write_sweep_csv, write_sweep_json
from inference.transcripts import TranscriptFormatError, load_transcripts
from mcts.dump import TreeFormatError, load_tree
from retrieval.corpus import CorpusFormatError, ingest_corpus, save_index
from settings.config import OVERRIDE_KEYS, ConfigError, apply_overrides, load_config
from settings.runtime import Runtime, default_index_path
from verify.verify import verify_determinism

if TYPE_CHECKING:
    from evaluation.golds import GoldRecord
    from mcts.tree import TreeNode
    from settings.config import RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_INPUT = 2

# Flag spelling -> (OVERRIDE_KEYS name, type).
_OVERRIDE_FLAGS: dict[str, tuple[str, type]] = {
    "--k": ("k", int),
    "--max-rounds": ("max_rounds", int),
    "--alpha": ("alpha", float),
    "--c-uct": ("c_uct", float),
    "--theta": ("theta", float),
    "--iterations": ("iterations", int),
    "--parallelism": ("parallelism", int),
    "--seed": ("seed", int),
}


def _logging_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Root logger level (default: WARNING)",
    )
    return common


def _run_parser(logging_parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    """Flags of the commands that read ``stepwise.toml``."""
    common = argparse.ArgumentParser(add_help=False, parents=[logging_parser])
    common.add_argument(
        "--config",
        default=None,
        help="Config file (default: ./stepwise.toml if present)",
    )
    for flag, (name, kind) in _OVERRIDE_FLAGS.items():
        common.add_argument(
            flag,
            dest=name,
            type=kind,
            default=None,
            help=f"Override {OVERRIDE_KEYS[name]}",
        )
    return common


def _build_parser() -> argparse.ArgumentParser:
    plain = _logging_parser()
    common = _run_parser(plain)
    parser = argparse.ArgumentParser(prog="stepwise")
    subparsers = parser.add_subparsers(dest="command", required=True)

    index_parser = subparsers.add_parser(
        "index", parents=[plain], help="Build and cache a corpus index"
    )
    index_parser.add_argument("corpus", help="Corpus JSONL file")
    index_parser.add_argument(
        "--out",
        default=None,
        help="Index cache path (default: <corpus>.index.json)",
    )

    annotate_parser = subparsers.add_parser(
        "annotate", parents=[common], help="Annotate questions and export preference pairs"
    )
    annotate_parser.add_argument("questions", help="Questions file (gold JSONL format)")
    annotate_parser.add_argument(
        "--out-dir",
        default=None,
        help="Output directory (default: dataset.output_dir)",
    )

    infer_parser = subparsers.add_parser(
        "infer", parents=[common], help="Run inference and write transcripts"
    )
    infer_parser.add_argument("questions", help="Questions file (gold JSONL format)")
    infer_parser.add_argument(
        "--out-dir",
        default=None,
        help="Output directory (default: dataset.output_dir)",
    )

    eval_parser = subparsers.add_parser(
        "eval", parents=[common], help="Score transcripts with EM and F1"
    )
    eval_parser.add_argument("transcripts", help="Transcripts JSONL file")
    eval_parser.add_argument(
        "--golds",
        default=None,
        help="Gold JSONL file (default: eval.gold_path)",
    )

    sweep_parser = subparsers.add_parser(
        "sweep", parents=[common], help="Evaluate inference across one parameter"
    )
    sweep_parser.add_argument("axis", choices=[axis.value for axis in SweepAxis])
    sweep_parser.add_argument("questions", help="Questions file (gold JSONL format)")
    sweep_parser.add_argument(
        "--values", type=int, nargs="+", required=True, help="Axis values, in order"
    )
    sweep_parser.add_argument(
        "--out-dir",
        default=None,
        help="Output directory (default: dataset.output_dir)",
    )

    stats_parser = subparsers.add_parser(
        "stats", parents=[plain], help="Report statistics of a pairs file"
    )
    stats_parser.add_argument("pairs", help="Pairs JSONL file")
    stats_parser.add_argument(
        "--trees",
        default=None,
        help="Tree directory; iteration counts then come from its trajectories",
    )

    validate_parser = subparsers.add_parser(
        "validate", parents=[plain], help="Validate an annotation output directory"
    )
    validate_parser.add_argument("artifacts_dir", help="Annotation output directory")
    validate_parser.add_argument(
        "--strict-schema-version",
        action="store_true",
        help="Treat a missing schema_version as an error",
    )

    verify_parser = subparsers.add_parser(
        "verify", parents=[common], help="Check that a command reproduces its artifacts"
    )
    verify_parser.add_argument("target", choices=["annotate", "infer"])
    verify_parser.add_argument("questions", help="Questions file (gold JSONL format)")
    verify_parser.add_argument(
        "--artifacts-dir",
        required=True,
        help="Directory written by an earlier run of the same command",
    )

    return parser


def _load_run_config(args: argparse.Namespace) -> RunConfig:
    config_path = Path(args.config).expanduser().resolve() if args.config else None
    config = load_config(config_path)
    overrides = {key: getattr(args, name) for name, key in OVERRIDE_KEYS.items()}
    return apply_overrides(config, overrides)


def _out_dir(config: RunConfig, out_dir: str | None) -> Path:
    if out_dir is None:
        return config.dataset.output_dir
    return Path(out_dir).expanduser().resolve()


def _error(message: str) -> int:
    sys.stderr.write(f"error: {message}\n")
    return EXIT_INPUT


def _handle_index(corpus: str, out: str | None) -> int:
    corpus_path = Path(corpus).expanduser().resolve()
    cache_path = Path(out).expanduser().resolve() if out else default_index_path(corpus_path)
    try:
        index = ingest_corpus(corpus_path)
    except CorpusFormatError as exc:
        return _error(f"{corpus_path}: {exc}")
    except OSError as exc:
        return _error(f"cannot read {corpus_path}: {exc}")
    save_index(index, cache_path)
    sys.stdout.write(f"indexed {index.doc_count} documents\n")
    return EXIT_OK


def _load_questions(path: str) -> list[GoldRecord]:
    return load_golds(Path(path).expanduser().resolve())


def _handle_annotate(config: RunConfig, questions_file: str, out_dir: str | None) -> int:
    questions = _load_questions(questions_file)
    with Runtime(config) as runtime:
        summary = write_annotation_artifacts(
            questions=questions,
            config=config,
            out_dir=_out_dir(config, out_dir),
            backend=runtime.backend(),
            retriever=runtime.retriever(),
        )
    for failure in summary.failures:
        logger.warning("Question %s failed: %s", failure["id"], failure["reason"])
    sys.stdout.write(
        f"annotated {summary.succeeded}/{summary.question_count} questions, "
        f"{len(summary.pairs)} pairs\n"
    )
    return EXIT_OK if summary.succeeded > 0 else EXIT_PARTIAL


def _handle_infer(config: RunConfig, questions_file: str, out_dir: str | None) -> int:
    questions = _load_questions(questions_file)
    with Runtime(config) as runtime:
        transcripts = write_inference_artifacts(
            questions=questions,
            config=config,
            out_dir=_out_dir(config, out_dir),
            backend=runtime.backend(),
            retriever=runtime.retriever(),
        )
    failed = sum(1 for transcript in transcripts if transcript.error is not None)
    for transcript in transcripts:
        if transcript.error is not None:
            logger.warning("Question %s failed: %s", transcript.key, transcript.error)
    sys.stdout.write(f"wrote {len(transcripts)} transcripts ({failed} failed)\n")
    return EXIT_OK if len(transcripts) > failed else EXIT_PARTIAL


def _handle_eval(config: RunConfig, transcripts_file: str, golds: str | None) -> int:
    gold_path = Path(golds).expanduser().resolve() if golds else config.eval.gold_path
    if gold_path is None:
        return _error("no gold file: pass --golds or set eval.gold_path")
    try:
        transcripts = load_transcripts(Path(transcripts_file).expanduser().resolve())
        summary = evaluate_run(transcripts, gold_map(load_golds(gold_path)))
    except (TranscriptFormatError, GoldFormatError, MissingGold, EmptyEvaluation) as exc:
        return _error(str(exc))
    sys.stdout.write(f"EM {summary.em:.1f} F1 {summary.f1:.1f}\n")
    return EXIT_OK


def _handle_sweep(
    config: RunConfig,
    axis: str,
    values: list[int],
    questions_file: str,
    out_dir: str | None,
) -> int:
    questions = _load_questions(questions_file)
    sweep_axis = SweepAxis(axis)
    try:
        with Runtime(config) as runtime:
            cells = sweep(
                sweep_axis,
                values,
                questions,
                runtime.backend,
                runtime.retriever(),
                config.inference_config(),
                parallelism=config.parallelism,
            )
    except ValueError as exc:
        return _error(str(exc))
    target = _out_dir(config, out_dir)
    write_sweep_csv(target / SWEEP_CSV, cells)
    write_sweep_json(target / SWEEP_JSON, sweep_axis, cells)
    for cell in cells:
        sys.stdout.write(
            f"{sweep_axis.value}={cell.value} EM {cell.em:.1f} F1 {cell.f1:.1f} n={cell.n}\n"
        )
    return EXIT_OK


def _load_tree_roots(trees_dir: Path) -> list[TreeNode]:
    return [load_tree(path).root for path in sorted(trees_dir.glob("*.json"))]


def _handle_stats(pairs_file: str, trees: str | None) -> int:
    try:
        pairs = load_pairs(Path(pairs_file).expanduser().resolve())
        roots = _load_tree_roots(Path(trees).expanduser().resolve()) if trees else None
    except PairsFormatError as exc:
        return _error(f"{pairs_file}: {exc}")
    except TreeFormatError as exc:
        return _error(str(exc))
    sys.stdout.write(render_stats_table(compute_stats(pairs, roots)))
    return EXIT_OK


def _handle_validate(artifacts_dir: str, *, strict_schema_version: bool) -> int:
    result = validate_artifacts(
        Path(artifacts_dir).expanduser().resolve(),
        strict_schema_version=strict_schema_version,
    )
    for warning in result.warnings:
        sys.stderr.write(f"warning: {warning.location()}: {warning.message}\n")
    if result.errors:
        for error in result.errors:
            sys.stderr.write(f"{error.location()}: {error.message}\n")
        return EXIT_PARTIAL
    return EXIT_OK


def _handle_verify(
    config: RunConfig,
    target: str,
    questions_file: str,
    artifacts_dir: str,
) -> int:
    questions = _load_questions(questions_file)
    resolved_artifacts_dir = Path(artifacts_dir).expanduser().resolve()

    def regenerate(out_dir: Path) -> None:
        write = write_annotation_artifacts if target == "annotate" else write_inference_artifacts
        with Runtime(config) as runtime:
            write(
                questions=questions,
                config=config,
                out_dir=out_dir,
                backend=runtime.backend(),
                retriever=runtime.retriever(),
            )

    try:
        result = verify_determinism(regenerate=regenerate, artifacts_dir=resolved_artifacts_dir)
    except (FileNotFoundError, NotADirectoryError) as exc:
        sys.stderr.write(f"artifacts-dir: {resolved_artifacts_dir}\n")
        return _error(str(exc))
    if not result.ok:
        for label, paths in (
            ("missing", result.missing),
            ("extra", result.extra),
            ("mismatches", result.mismatches),
        ):
            for path in paths:
                sys.stderr.write(f"{label}: {path}\n")
        return EXIT_PARTIAL
    return EXIT_OK


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "index":
        return _handle_index(args.corpus, args.out)
    if args.command == "stats":
        return _handle_stats(args.pairs, args.trees)
    if args.command == "validate":
        return _handle_validate(
            args.artifacts_dir, strict_schema_version=args.strict_schema_version
        )

    config = _load_run_config(args)
    if args.command == "annotate":
        return _handle_annotate(config, args.questions, args.out_dir)
    if args.command == "infer":
        return _handle_infer(config, args.questions, args.out_dir)
    if args.command == "eval":
        return _handle_eval(config, args.transcripts, args.golds)
    if args.command == "sweep":
        return _handle_sweep(config, args.axis, args.values, args.questions, args.out_dir)
    if args.command == "verify":
        return _handle_verify(config, args.target, args.questions, args.artifacts_dir)

    raise AssertionError


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _dispatch(args)
    except (ConfigError, GoldFormatError, CorpusFormatError) as exc:
        return _error(str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
