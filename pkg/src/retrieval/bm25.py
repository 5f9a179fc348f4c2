"""BM25 top-k retrieval over a :class:`CorpusIndex`."""

from __future__ import annotations

from typing import TYPE_CHECKING, Protocol

from evaluation.metrics import normalize
from retrieval.corpus import idf

if TYPE_CHECKING:
    from retrieval.corpus import CorpusIndex
    from retrieval.models import Document

K1 = 1.2
B = 0.75
DEFAULT_TOP_K = 3


class Retriever(Protocol):
    """Anything that maps a query to ranked documents."""

    def retrieve(self, query: str, k: int) -> list[Document]: ...


def retrieve(index: CorpusIndex, query: str, k: int = DEFAULT_TOP_K) -> list[Document]:
    """Return up to ``k`` documents by descending BM25 score, ties by id.

    Documents sharing no term with the query are never returned, so the
    result may be empty.
    """
    if k < 1:
        msg = f"k must be >= 1, got {k}"
        raise ValueError(msg)

    scores: dict[str, float] = {}
    # Sorted distinct terms keep float summation order fixed.
    for term in sorted(set(normalize(query))):
        postings = index.postings.get(term)
        if not postings:
            continue
        weight = idf(index.doc_count, len(postings))
        for posting in postings:
            length_norm = 1.0 - B + B * index.doc_lengths[posting.doc_id] / index.avg_doc_length
            gain = weight * posting.tf * (K1 + 1.0) / (posting.tf + K1 * length_norm)
            scores[posting.doc_id] = scores.get(posting.doc_id, 0.0) + gain

    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))[:k]
    return [
        index.documents[doc_id].model_copy(update={"score": score})
        for doc_id, score in ranked
    ]


class LocalRetriever:
    """In-process retriever over an immutable index."""

    def __init__(self, index: CorpusIndex) -> None:
        self.index = index

    def retrieve(self, query: str, k: int) -> list[Document]:
        return retrieve(self.index, query, k)


__all__ = ["B", "DEFAULT_TOP_K", "K1", "LocalRetriever", "Retriever", "retrieve"]
