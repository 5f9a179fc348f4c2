"""Deterministic scripted backend used by tests and desk-scale runs."""

from __future__ import annotations

import threading
from collections.abc import Callable, Mapping, Sequence
from typing import TYPE_CHECKING

import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from errors import BackendUnavailable
from policy.backends import PolicyRequest, request_fingerprint
from policy.templates import TemplateName

if TYPE_CHECKING:
    from pathlib import Path

Reply = str | Sequence[str]
DefaultReply = str | Callable[[PolicyRequest], str]


class UnscriptedRequest(BackendUnavailable):
    """Raised when no script entry, rule or default answers a request."""

    def __init__(self, fingerprint: str) -> None:
        self.fingerprint = fingerprint
        super().__init__(f"no scripted reply for {fingerprint}")


class ScriptFileError(Exception):
    """Raised when a script file cannot be loaded."""


class ScriptRule(BaseModel):
    """Substring matcher: replies when every ``contains`` string is present."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    template: TemplateName | None = None
    contains: tuple[str, ...] = ()
    reply: str | tuple[str, ...]

    def matches(self, request: PolicyRequest) -> bool:
        if self.template is not None and request.template is not self.template:
            return False
        return all(part in request.user for part in self.contains)


class ScriptFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    strict: bool = False
    default: str | None = None
    fingerprints: dict[str, str | list[str]] = Field(default_factory=dict)
    rules: list[ScriptRule] = Field(default_factory=list)


class ScriptedBackend:
    """Replies from a fingerprint table, then ordered rules, then a default.

    A reply given as a sequence is served in rotation per key, so repeated
    identical requests can yield distinct (but reproducible) actions.
    Every request is recorded in :attr:`calls`.
    """

    def __init__(
        self,
        script: Mapping[str, Reply] | None = None,
        *,
        rules: Sequence[ScriptRule] = (),
        default: DefaultReply | None = None,
        strict: bool = False,
    ) -> None:
        self._script = dict(script or {})
        self._rules = tuple(rules)
        self._default = default
        self._strict = strict
        self._lock = threading.Lock()
        self._served: dict[str, int] = {}
        self._calls: list[PolicyRequest] = []

    @classmethod
    def from_file(cls, path: Path) -> ScriptedBackend:
        try:
            script = ScriptFile.model_validate(orjson.loads(path.read_bytes()))
        except (OSError, orjson.JSONDecodeError, ValidationError) as exc:
            msg = f"Invalid script file {path}: {exc}"
            raise ScriptFileError(msg) from exc
        return cls(
            script.fingerprints,
            rules=script.rules,
            default=script.default,
            strict=script.strict,
        )

    @property
    def calls(self) -> tuple[PolicyRequest, ...]:
        with self._lock:
            return tuple(self._calls)

    def _rotate(self, key: str, reply: Reply) -> str:
        if isinstance(reply, str):
            return reply
        if not reply:
            raise UnscriptedRequest(key)
        served = self._served.get(key, 0)
        self._served[key] = served + 1
        return reply[served % len(reply)]

    def complete(self, request: PolicyRequest) -> str:
        key = request_fingerprint(request)
        with self._lock:
            self._calls.append(request)
            if key in self._script:
                return self._rotate(key, self._script[key])
            if self._strict:
                raise UnscriptedRequest(key)
            for position, rule in enumerate(self._rules):
                if rule.matches(request):
                    return self._rotate(f"rule:{position}:{key}", rule.reply)
            default = self._default
        if default is None:
            raise UnscriptedRequest(key)
        if isinstance(default, str):
            return default
        return default(request)


__all__ = [
    "ScriptFile",
    "ScriptFileError",
    "ScriptRule",
    "ScriptedBackend",
    "UnscriptedRequest",
]
