"""HTTP client for an external (e.g. dense) retriever.

Wire format: POST ``{"query": str, "top_k": int}``; reply
``{"docs": [{"id", "title", "contents", "score"}]}``.
"""

from __future__ import annotations

import logging
import time
from typing import TYPE_CHECKING

import httpx
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from errors import BackendTimeout, BackendUnavailable
from retrieval.models import Document

if TYPE_CHECKING:
    from collections.abc import Callable

logger = logging.getLogger(__name__)


class MalformedRetrievalReply(Exception):
    """Raised when a retriever reply does not hold valid documents."""


class RemoteRetrieverConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    endpoint: str
    timeout: float = Field(default=30.0, gt=0)
    max_retries: int = Field(default=2, ge=0)
    backoff_base: float = Field(default=0.5, ge=0)


class _Reply(BaseModel):
    docs: list[Document]


class RemoteRetriever:
    """Retriever backed by an HTTP endpoint; safe to share between threads."""

    def __init__(
        self,
        config: RemoteRetrieverConfig,
        *,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.config = config
        self._sleep = sleep
        self._client = httpx.Client(timeout=config.timeout, transport=transport)

    @property
    def is_closed(self) -> bool:
        return self._client.is_closed

    def close(self) -> None:
        self._client.close()

    def _post(self, body: dict[str, object]) -> httpx.Response:
        attempts = self.config.max_retries + 1
        last_exc: BackendUnavailable | None = None
        for attempt in range(attempts):
            try:
                response = self._client.post(self.config.endpoint, json=body)
            except httpx.TimeoutException as exc:
                last_exc = BackendTimeout(f"retriever timed out: {exc}")
            except httpx.TransportError as exc:
                last_exc = BackendUnavailable(f"retriever unreachable: {exc}")
            else:
                if response.status_code < 500 and response.status_code != 429:
                    return response
                last_exc = BackendUnavailable(
                    f"retriever returned HTTP {response.status_code}",
                    status_code=response.status_code,
                    body=response.text[:200],
                )
            if attempt + 1 < attempts:
                logger.warning(
                    "Retriever attempt %d/%d failed: %s", attempt + 1, attempts, last_exc
                )
                self._sleep(self.config.backoff_base * 2**attempt)
        assert last_exc is not None
        raise last_exc

    def retrieve(self, query: str, k: int) -> list[Document]:
        """Fetch up to ``k`` validated documents for ``query``.

        Raises:
            BackendUnavailable: Transport failure or timeout after retries.
            MalformedRetrievalReply: Non-2xx reply, non-JSON body or a document
                violating the :class:`Document` invariants.
        """
        response = self._post({"query": query, "top_k": k})
        if response.status_code >= 400:
            msg = f"retriever returned HTTP {response.status_code}"
            raise MalformedRetrievalReply(msg)
        try:
            reply = _Reply.model_validate_json(response.content)
        except ValidationError as exc:
            msg = f"invalid retriever reply: {exc}"
            raise MalformedRetrievalReply(msg) from exc
        return reply.docs[:k]


__all__ = ["MalformedRetrievalReply", "RemoteRetriever", "RemoteRetrieverConfig"]
