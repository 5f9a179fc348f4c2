"""Exact-match and token-F1 answer metrics.

Normalization follows the usual QA convention: lowercase, drop punctuation,
drop the articles a/an/the, collapse whitespace. The same tokenizer feeds
the lexical retriever. Multi-reference scoring takes the max over golds;
F1 overlap is multiset (token counts matter).
"""

from __future__ import annotations

import re
import string
from collections import Counter
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence

_PUNCTUATION = frozenset(string.punctuation)
_ARTICLES_RE = re.compile(r"\b(a|an|the)\b")


def normalize(text: str) -> list[str]:
    """Return the normalized token list of ``text``."""
    lowered = text.lower()
    stripped = "".join(ch for ch in lowered if ch not in _PUNCTUATION)
    without_articles = _ARTICLES_RE.sub(" ", stripped)
    return without_articles.split()


def exact_match(prediction: str, golds: Sequence[str]) -> int:
    """1 when the normalized prediction equals some normalized gold."""
    predicted = normalize(prediction)
    return int(any(predicted == normalize(gold) for gold in golds))


def _token_f1(predicted: list[str], gold: list[str]) -> float:
    if not predicted and not gold:
        return 1.0
    if not predicted or not gold:
        return 0.0
    overlap = sum((Counter(predicted) & Counter(gold)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(predicted)
    recall = overlap / len(gold)
    return 2 * precision * recall / (precision + recall)


def f1_score(prediction: str, golds: Sequence[str]) -> float:
    """Max token-level F1 of ``prediction`` against each gold answer."""
    predicted = normalize(prediction)
    return max((_token_f1(predicted, normalize(gold)) for gold in golds), default=0.0)


__all__ = ["exact_match", "f1_score", "normalize"]
