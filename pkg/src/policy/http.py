"""Chat-completion HTTP backend with bounded concurrency and retries."""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import httpx
from pydantic import BaseModel, ConfigDict, Field

from errors import AuthFailure, BackendTimeout, BackendUnavailable

if TYPE_CHECKING:
    from collections.abc import Callable

    from policy.backends import PolicyRequest

logger = logging.getLogger(__name__)


class EndpointConfig(BaseModel):
    """Connection settings for an OpenAI-compatible chat endpoint."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    endpoint: str
    model: str
    timeout: float = Field(default=60.0, gt=0)
    max_retries: int = Field(default=3, ge=0)
    backoff_base: float = Field(default=1.0, ge=0)
    max_in_flight: int = Field(default=4, ge=1)
    api_token: str | None = Field(default=None, repr=False)


@dataclass(frozen=True)
class CallRecord:
    template: str
    attempts: int
    succeeded: bool

    @property
    def retries(self) -> int:
        return self.attempts - 1


class HttpBackend:
    """Policy backend speaking the chat-completions wire format.

    At most ``max_in_flight`` requests run at once across threads. Timeouts,
    transport errors, 429 and 5xx replies are retried with exponential
    backoff; 401/403 fail immediately.
    """

    def __init__(
        self,
        config: EndpointConfig,
        *,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.config = config
        self._sleep = sleep
        headers = {}
        if config.api_token:
            headers["Authorization"] = f"Bearer {config.api_token}"
        self._client = httpx.Client(
            timeout=config.timeout, headers=headers, transport=transport
        )
        self._slots = threading.Semaphore(config.max_in_flight)
        self._lock = threading.Lock()
        self._calls: list[CallRecord] = []

    @property
    def calls(self) -> tuple[CallRecord, ...]:
        with self._lock:
            return tuple(self._calls)

    @property
    def is_closed(self) -> bool:
        return self._client.is_closed

    def close(self) -> None:
        self._client.close()

    def _body(self, request: PolicyRequest) -> dict[str, Any]:
        body: dict[str, Any] = {
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        if request.seed is not None:
            body["seed"] = request.seed
        return body

    def _record(self, request: PolicyRequest, attempts: int, succeeded: bool) -> None:
        with self._lock:
            self._calls.append(
                CallRecord(request.template.value, attempts, succeeded)
            )

    def complete(self, request: PolicyRequest) -> str:
        body = self._body(request)
        attempts = self.config.max_retries + 1
        last_exc: BackendUnavailable | None = None
        for attempt in range(attempts):
            try:
                # A slot is held for the request only, never across a backoff sleep.
                with self._slots:
                    response = self._client.post(self.config.endpoint, json=body)
            except httpx.TimeoutException as exc:
                last_exc = BackendTimeout(f"policy endpoint timed out: {exc}")
            except httpx.TransportError as exc:
                last_exc = BackendUnavailable(f"policy endpoint unreachable: {exc}")
            else:
                status = response.status_code
                if status in (401, 403):
                    self._record(request, attempt + 1, succeeded=False)
                    msg = f"policy endpoint rejected credentials (HTTP {status})"
                    raise AuthFailure(msg, status_code=status, body=response.text[:200])
                if status == 429 or status >= 500:
                    last_exc = BackendUnavailable(
                        f"policy endpoint returned HTTP {status}",
                        status_code=status,
                        body=response.text[:200],
                    )
                elif status >= 400:
                    self._record(request, attempt + 1, succeeded=False)
                    msg = f"policy endpoint returned HTTP {status}"
                    raise BackendUnavailable(msg, status_code=status, body=response.text[:200])
                else:
                    try:
                        text = _reply_text(response)
                    except BackendUnavailable:
                        self._record(request, attempt + 1, succeeded=False)
                        raise
                    self._record(request, attempt + 1, succeeded=True)
                    return text
            if attempt + 1 < attempts:
                delay = self.config.backoff_base * 2**attempt
                logger.warning(
                    "Policy attempt %d/%d failed: %s; retrying in %.1fs",
                    attempt + 1,
                    attempts,
                    last_exc,
                    delay,
                )
                self._sleep(delay)
        self._record(request, attempts, succeeded=False)
        assert last_exc is not None
        raise last_exc


def _reply_text(response: httpx.Response) -> str:
    try:
        data = response.json()
        content = data["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        msg = f"unexpected policy reply shape: {exc}"
        raise BackendUnavailable(msg, status_code=response.status_code) from exc
    if not isinstance(content, str):
        msg = "policy reply content is not text"
        raise BackendUnavailable(msg, status_code=response.status_code)
    return content


__all__ = ["CallRecord", "EndpointConfig", "HttpBackend"]
