"""Provider-agnostic chat-completion client with image inputs.

Provider profiles are data (base URL, auth header, request shape), so a new
OpenAI-compatible endpoint is a config entry, not code. Mock providers
implement the same Provider interface and are registered under their own ids,
which keeps every downstream module indifferent to where text comes from.
"""

from __future__ import annotations

import base64
import os
import random
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Union

import httpx

from ..errors import (
    AuthFailureError,
    MalformedProviderResponseError,
    PreconditionError,
    ProviderTimeoutError,
    RateLimitedError,
    UnknownProviderError,
)
from ..store import BlobStore, ImageRef


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class ImagePart:
    image: ImageRef


Part = Union[TextPart, ImagePart]


@dataclass(frozen=True)
class Message:
    role: str
    parts: tuple[Part, ...]

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise PreconditionError(f"bad message role: {self.role!r}")


def user_message(*parts: Part) -> Message:
    return Message(role="user", parts=tuple(parts))


@dataclass(frozen=True)
class DecodeParams:
    max_output_tokens: int = 8192
    temperature: float = 0.0

    def __post_init__(self):
        if self.max_output_tokens < 1:
            raise PreconditionError("max_output_tokens must be >= 1")
        if self.temperature < 0:
            raise PreconditionError("temperature must be >= 0")


@dataclass(frozen=True)
class ChatRequest:
    provider_id: str
    model_id: str
    messages: tuple[Message, ...]
    decode: DecodeParams = field(default_factory=DecodeParams)

    def __post_init__(self):
        if not self.messages:
            raise PreconditionError("a chat request needs at least one message")

    def image_hashes(self) -> list[str]:
        return [p.image.hash for m in self.messages for p in m.parts if isinstance(p, ImagePart)]


@dataclass(frozen=True)
class TokenUsage:
    prompt: int
    completion: int


@dataclass
class ChatResponse:
    raw_text: str
    latency_ms: float
    token_usage: Optional[TokenUsage] = None
    retries: int = 0


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 4
    base_delay_s: float = 0.25
    max_delay_s: float = 4.0
    jitter: float = 0.2

    def delay(self, attempt: int, rng: random.Random) -> float:
        raw = min(self.max_delay_s, self.base_delay_s * (2 ** attempt))
        return raw * (1.0 + self.jitter * rng.random())


@dataclass(frozen=True)
class ProviderProfile:
    id: str
    base_url: str
    auth_env: str
    auth_header: str = "Authorization"
    auth_scheme: str = "Bearer"
    request_shape: str = "openai-chat"
    concurrency: int = 4
    timeout_s: float = 120.0


class Provider(Protocol):
    def complete(self, request: ChatRequest, resolve_image: Callable[[str], bytes]) -> ChatResponse:
        ...


class Transport(Protocol):
    def post(self, url: str, headers: dict, payload: dict, timeout_s: float) -> tuple[int, object]:
        """Returns (status_code, decoded JSON body or raw text)."""


class HttpxTransport:
    def post(self, url: str, headers: dict, payload: dict, timeout_s: float) -> tuple[int, object]:
        try:
            resp = httpx.post(url, headers=headers, json=payload, timeout=timeout_s)
        except httpx.TimeoutException as exc:
            raise ProviderTimeoutError(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise MalformedProviderResponseError(f"transport failure: {exc}") from exc
        try:
            body = resp.json()
        except ValueError:
            body = resp.text
        return resp.status_code, body


class HttpJsonProvider:
    """Speaks an OpenAI-style JSON chat wire format per its profile."""

    def __init__(self, profile: ProviderProfile, transport: Transport | None = None,
                 retry: RetryPolicy | None = None, rng: random.Random | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        if profile.request_shape != "openai-chat":
            raise PreconditionError(f"unsupported request shape: {profile.request_shape!r}")
        self.profile = profile
        self.transport = transport or HttpxTransport()
        self.retry = retry or RetryPolicy()
        self.rng = rng or random.Random()
        self.sleep = sleep

    def _api_key(self) -> str:
        key = os.environ.get(self.profile.auth_env, "")
        if not key:
            raise AuthFailureError(
                f"provider {self.profile.id!r} needs ${self.profile.auth_env} in the environment"
            )
        return key

    def _wire_messages(self, request: ChatRequest, resolve_image: Callable[[str], bytes]) -> list[dict]:
        wire = []
        for msg in request.messages:
            content: list[dict] = []
            for part in msg.parts:
                if isinstance(part, TextPart):
                    content.append({"type": "text", "text": part.text})
                else:
                    b64 = base64.b64encode(resolve_image(part.image.hash)).decode("ascii")
                    content.append({
                        "type": "image_url",
                        "image_url": {"url": f"data:image/png;base64,{b64}"},
                    })
            wire.append({"role": msg.role, "content": content})
        return wire

    def complete(self, request: ChatRequest, resolve_image: Callable[[str], bytes]) -> ChatResponse:
        headers = {
            self.profile.auth_header: f"{self.profile.auth_scheme} {self._api_key()}".strip(),
            "Content-Type": "application/json",
        }
        payload = {
            "model": request.model_id,
            "messages": self._wire_messages(request, resolve_image),
            "max_tokens": request.decode.max_output_tokens,
            "temperature": request.decode.temperature,
        }
        url = self.profile.base_url.rstrip("/") + "/chat/completions"

        attempts = self.retry.max_attempts
        last_error: Exception | None = None
        retries = 0
        for attempt in range(attempts):
            try:
                status, body = self.transport.post(url, headers, payload, self.profile.timeout_s)
            except ProviderTimeoutError as exc:
                last_error = exc
                if attempt < attempts - 1:
                    retries += 1
                    self.sleep(self.retry.delay(attempt, self.rng))
                    continue
                raise
            if status == 401 or status == 403:
                raise AuthFailureError(f"provider rejected credentials (HTTP {status})")
            if status == 429 or status >= 500:
                last_error = RateLimitedError(f"HTTP {status}") if status == 429 else \
                    MalformedProviderResponseError(f"HTTP {status}")
                if attempt < attempts - 1:
                    retries += 1
                    self.sleep(self.retry.delay(attempt, self.rng))
                    continue
                raise last_error
            if status != 200:
                raise MalformedProviderResponseError(f"unexpected HTTP {status}: {body!r}")
            return self._parse_body(body, retries)
        raise last_error or MalformedProviderResponseError("no response")

    @staticmethod
    def _parse_body(body: object, retries: int) -> ChatResponse:
        if not isinstance(body, dict):
            raise MalformedProviderResponseError(f"non-JSON body: {body!r}")
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedProviderResponseError(f"missing choices[0].message.content: {body!r}") from exc
        if not isinstance(text, str) or not text:
            raise MalformedProviderResponseError("empty completion text")
        usage = None
        if isinstance(body.get("usage"), dict):
            u = body["usage"]
            usage = TokenUsage(prompt=int(u.get("prompt_tokens", 0)),
                               completion=int(u.get("completion_tokens", 0)))
        return ChatResponse(raw_text=text, latency_ms=0.0, token_usage=usage, retries=retries)


class ChatClient:
    """Routes requests to registered providers, enforcing request invariants.

    Thread-safe: per-provider semaphores bound in-flight completions; there
    is no other shared mutable state.
    """

    def __init__(self, store: BlobStore):
        self.store = store
        self._providers: dict[str, Provider] = {}
        self._limits: dict[str, threading.Semaphore] = {}

    def register(self, provider_id: str, provider: Provider, concurrency: int = 4) -> None:
        self._providers[provider_id] = provider
        self._limits[provider_id] = threading.Semaphore(concurrency)

    def register_profile(self, profile: ProviderProfile, transport: Transport | None = None,
                         retry: RetryPolicy | None = None) -> None:
        self.register(profile.id, HttpJsonProvider(profile, transport=transport, retry=retry),
                      concurrency=profile.concurrency)

    def has_provider(self, provider_id: str) -> bool:
        return provider_id in self._providers

    def complete(self, request: ChatRequest) -> ChatResponse:
        provider = self._providers.get(request.provider_id)
        if provider is None:
            raise UnknownProviderError(f"no provider registered as {request.provider_id!r}")
        for digest in request.image_hashes():
            if not self.store.has_blob(digest):
                raise PreconditionError(f"image {digest} not present in the blob store")
        started = time.monotonic()
        with self._limits[request.provider_id]:
            response = provider.complete(request, self.store.get_blob)
        response.latency_ms = (time.monotonic() - started) * 1000.0
        if not response.raw_text:
            raise MalformedProviderResponseError("provider returned empty text")
        return response
