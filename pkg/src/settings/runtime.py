"""Construct backends and retrievers from a :class:`RunConfig`."""

from __future__ import annotations

import logging
import os
from contextlib import ExitStack
from typing import TYPE_CHECKING, TypeVar

from contract.artifacts import INDEX_CACHE_SUFFIX
from policy.http import EndpointConfig, HttpBackend
from policy.scripted import ScriptedBackend, ScriptFileError
from retrieval.bm25 import LocalRetriever
from retrieval.corpus import load_or_build_index
from retrieval.remote import RemoteRetriever, RemoteRetrieverConfig
from settings.config import TOKEN_ENV_VAR, ConfigError

if TYPE_CHECKING:
    from pathlib import Path
    from types import TracebackType

    from policy.backends import PolicyBackend
    from retrieval.bm25 import Retriever
    from settings.config import RunConfig

logger = logging.getLogger(__name__)

_R = TypeVar("_R")


def build_backend(config: RunConfig) -> PolicyBackend:
    """Scripted backend from its script file, or the HTTP client.

    The HTTP auth token comes from ``STEPWISE_API_TOKEN`` only.
    """
    section = config.backend
    if section.kind == "scripted":
        if section.script_path is None:
            msg = "backend.kind = 'scripted' needs backend.script_path"
            raise ConfigError(msg)
        try:
            return ScriptedBackend.from_file(section.script_path)
        except ScriptFileError as exc:
            raise ConfigError(str(exc)) from exc

    token = os.environ.get(TOKEN_ENV_VAR)
    if not token:
        logger.warning(
            "%s is not set; calling %s without credentials", TOKEN_ENV_VAR, section.endpoint
        )
    assert section.endpoint is not None and section.model is not None
    return HttpBackend(
        EndpointConfig(
            endpoint=section.endpoint,
            model=section.model,
            timeout=section.timeout,
            max_retries=section.max_retries,
            backoff_base=section.backoff_base,
            max_in_flight=section.max_in_flight,
            api_token=token or None,
        )
    )


def default_index_path(corpus_path: Path) -> Path:
    return corpus_path.with_name(corpus_path.name + INDEX_CACHE_SUFFIX)


def build_retriever(config: RunConfig) -> Retriever:
    """Local BM25 over the (cached) corpus index, or the remote client."""
    section = config.retriever
    if section.kind == "remote":
        assert section.endpoint is not None
        return RemoteRetriever(
            RemoteRetrieverConfig(
                endpoint=section.endpoint,
                timeout=section.timeout,
                max_retries=section.max_retries,
            )
        )
    if section.corpus_path is None:
        msg = "retriever.kind = 'local' needs retriever.corpus_path"
        raise ConfigError(msg)
    cache = section.index_path or default_index_path(section.corpus_path)
    return LocalRetriever(load_or_build_index(section.corpus_path, cache))


class Runtime:
    """Backends and retrievers built for one command, closed together on exit.

    Every ``backend()`` call builds a new backend.
    """

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self._stack = ExitStack()

    def __enter__(self) -> Runtime:
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self._stack.close()

    def _register(self, resource: _R) -> _R:
        close = getattr(resource, "close", None)
        if callable(close):
            self._stack.callback(close)
        return resource

    def backend(self) -> PolicyBackend:
        return self._register(build_backend(self.config))

    def retriever(self) -> Retriever:
        return self._register(build_retriever(self.config))


__all__ = ["Runtime", "build_backend", "build_retriever", "default_index_path"]
