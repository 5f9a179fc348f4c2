"""Transport errors shared by policy backends and remote retrievers."""

from __future__ import annotations


class BackendUnavailable(Exception):
    """Raised when a remote endpoint cannot serve a request after retries."""

    def __init__(
        self,
        message: str,
        status_code: int | None = None,
        body: str | None = None,
    ) -> None:
        self.status_code = status_code
        self.body = body
        super().__init__(message)


class BackendTimeout(BackendUnavailable):
    """Raised when the final attempt against an endpoint timed out."""


class AuthFailure(BackendUnavailable):
    """Raised on HTTP 401/403; never retried."""


__all__ = ["AuthFailure", "BackendTimeout", "BackendUnavailable"]
