"""Policy backend contract: one prompt in, one text reply out."""

from __future__ import annotations

import hashlib
from typing import Protocol

from pydantic import BaseModel, ConfigDict, Field

from policy.templates import TemplateName


class PolicyRequest(BaseModel):
    """A single chat-completion style request."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    template: TemplateName
    system: str
    user: str
    temperature: float = Field(default=0.0, ge=0)
    max_output_tokens: int = Field(default=512, gt=0)
    seed: int | None = None


class PolicyBackend(Protocol):
    """Maps a stage-conditioned prompt to a text response.

    Implementations must be safe to share between threads.
    """

    def complete(self, request: PolicyRequest) -> str: ...


def fingerprint(template: TemplateName | str, user: str) -> str:
    """Stable key for a request: template name plus a hash of the user text.

    Whitespace runs are collapsed before hashing so fixtures can be written
    without caring about incidental spacing.
    """
    name = template.value if isinstance(template, TemplateName) else template
    canonical = " ".join(user.split())
    digest = hashlib.sha256(canonical.encode("utf-8")).hexdigest()
    return f"{name}:{digest}"


def request_fingerprint(request: PolicyRequest) -> str:
    return fingerprint(request.template, request.user)


__all__ = ["PolicyBackend", "PolicyRequest", "fingerprint", "request_fingerprint"]
