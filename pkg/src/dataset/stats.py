"""Dataset statistics: question/pair counts and distribution histograms."""

from __future__ import annotations

import statistics
from collections import Counter
from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict

from agent.models import ActionKind, Stage
from contract.artifacts import ARTIFACT_SCHEMA_VERSION

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from agent.models import ActionStep
    from dataset.pairs import PreferencePair
    from mcts.tree import TreeNode

GAP_BIN_WIDTH = 0.1
_GAP_BINS = 10


class SummaryStats(BaseModel):
    """Average, minimum, median and maximum; all zero for an empty sample."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    avg: float = 0.0
    min: float = 0.0
    med: float = 0.0
    max: float = 0.0
    count: int = 0

    @classmethod
    def of(cls, values: Sequence[int | float]) -> SummaryStats:
        if not values:
            return cls()
        return cls(
            avg=statistics.fmean(values),
            min=min(values),
            med=statistics.median(values),
            max=max(values),
            count=len(values),
        )


class DatasetStats(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    schema_version: int = ARTIFACT_SCHEMA_VERSION
    question_count: int
    pair_count: int
    action_kind_histogram: dict[str, int]
    distinct_chosen_actions: int
    distinct_action_kind_histogram: dict[str, int]
    pair_type_histogram: dict[str, int]
    iteration_stats: SummaryStats
    iteration_histogram: dict[str, int]
    token_length_stats: SummaryStats
    reward_gap_histogram: dict[str, int]
    source_histogram: dict[str, int]


def _kind_histogram(kinds: Iterable[ActionKind]) -> dict[str, int]:
    counts = Counter(kinds)
    return {kind.value: counts.get(kind, 0) for kind in ActionKind}


def _gap_bin(gap: float) -> str:
    position = min(max(int(gap / GAP_BIN_WIDTH + 1e-9), 0), _GAP_BINS - 1)
    low = position * GAP_BIN_WIDTH
    return f"{low:.1f}-{low + GAP_BIN_WIDTH:.1f}"


def _gap_bins() -> dict[str, int]:
    return {_gap_bin(position * GAP_BIN_WIDTH): 0 for position in range(_GAP_BINS)}


def _query_count(steps: Iterable[ActionStep]) -> int:
    return sum(1 for step in steps if step.kind is ActionKind.QUERY)


def trajectory_iterations(root: TreeNode) -> list[int]:
    """Query count of every root-to-terminal path, in pre-order."""
    return [
        _query_count(node.state.steps)
        for node in root.walk()
        if node.stage is Stage.TERMINAL
    ]


def compute_stats(
    pairs: Sequence[PreferencePair],
    trees: Sequence[TreeNode] | None = None,
) -> DatasetStats:
    """Summarize a pair list.

    Iteration counts come from the terminal trajectories of ``trees`` when
    given, else from each distinct pair's prefix plus chosen step. Token
    lengths count whitespace tokens of chosen and rejected responses.
    """
    questions_by_source: dict[str, set[str]] = {}
    for pair in pairs:
        questions_by_source.setdefault(pair.source, set()).add(pair.question)

    distinct_chosen: dict[tuple[str, tuple[str, ...], str], ActionKind] = {}
    for pair in pairs:
        key = (pair.question, tuple(s.raw_text for s in pair.prefix), pair.chosen.raw_text)
        distinct_chosen.setdefault(key, pair.chosen.kind)

    if trees is not None:
        iterations = [count for root in trees for count in trajectory_iterations(root)]
    else:
        trajectories: dict[tuple[str, ...], int] = {}
        for pair in pairs:
            steps = (*pair.prefix, pair.chosen)
            path_key = (pair.question, *(s.raw_text for s in steps))
            trajectories.setdefault(path_key, _query_count(steps))
        iterations = list(trajectories.values())

    lengths = [
        len(step.raw_text.split()) for pair in pairs for step in (pair.chosen, pair.rejected)
    ]
    gaps = _gap_bins()
    for pair in pairs:
        gaps[_gap_bin(pair.gap)] += 1

    pair_types = Counter(f"{c.value}-{r.value}" for c, r in (p.pair_type for p in pairs))
    return DatasetStats(
        question_count=len({pair.question for pair in pairs}),
        pair_count=len(pairs),
        action_kind_histogram=_kind_histogram(pair.chosen.kind for pair in pairs),
        distinct_chosen_actions=len(distinct_chosen),
        distinct_action_kind_histogram=_kind_histogram(distinct_chosen.values()),
        pair_type_histogram=dict(sorted(pair_types.items())),
        iteration_stats=SummaryStats.of(iterations),
        iteration_histogram={
            str(count): total for count, total in sorted(Counter(iterations).items())
        },
        token_length_stats=SummaryStats.of(lengths),
        reward_gap_histogram=gaps,
        source_histogram={
            source: len(questions) for source, questions in sorted(questions_by_source.items())
        },
    )


def render_stats_table(stats: DatasetStats) -> str:
    """Plain-text report: counts first, then each distribution."""
    it = stats.iteration_stats
    tokens = stats.token_length_stats
    kinds = stats.action_kind_histogram
    rows = [
        ("Questions", str(stats.question_count)),
        ("Pairs", str(stats.pair_count)),
        ("Actions (pairs)", str(stats.pair_count)),
        ("Actions (distinct chosen)", str(stats.distinct_chosen_actions)),
        (
            "Query / Evidence / Answer",
            f"{kinds['query']} / {kinds['evidence']} / {kinds['answer']}",
        ),
        (
            "Avg./Min./Med./Max. Iteration",
            f"{it.avg:.1f}/{it.min:g}/{it.med:g}/{it.max:g}",
        ),
        (
            "Avg./Min./Med./Max. Tokens",
            f"{tokens.avg:.1f}/{tokens.min:g}/{tokens.med:g}/{tokens.max:g}",
        ),
    ]
    for title, histogram in (
        ("Source", stats.source_histogram),
        ("Pair type", stats.pair_type_histogram),
        ("Reward gap", stats.reward_gap_histogram),
    ):
        rows.extend((f"{title} {name or '-'}", str(count)) for name, count in histogram.items())
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label.ljust(width)}  {value}" for label, value in rows) + "\n"


__all__ = [
    "DatasetStats",
    "GAP_BIN_WIDTH",
    "SummaryStats",
    "compute_stats",
    "render_stats_table",
    "trajectory_iterations",
]
