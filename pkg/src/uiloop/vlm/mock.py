"""Offline providers: scripted and echo completions for tests and CI runs."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable

from ..errors import PreconditionError
from .client import ChatRequest, ChatResponse


class EchoProvider:
    """Returns a fixed text, or the request's last text part when none given."""

    def __init__(self, text: str | None = None):
        self.text = text
        self.calls = 0

    def complete(self, request: ChatRequest, resolve_image) -> ChatResponse:
        self.calls += 1
        if self.text is not None:
            return ChatResponse(raw_text=self.text, latency_ms=0.0)
        for msg in reversed(request.messages):
            for part in reversed(msg.parts):
                text = getattr(part, "text", None)
                if text:
                    return ChatResponse(raw_text=text, latency_ms=0.0)
        return ChatResponse(raw_text="OK", latency_ms=0.0)


class ScriptedProvider:
    """Replays a fixed sequence of responses, optionally looping.

    Script files are JSON: {"responses": ["...", ...], "loop": false}.
    """

    def __init__(self, responses: list[str], loop: bool = False):
        if not responses:
            raise PreconditionError("scripted provider needs at least one response")
        self.responses = list(responses)
        self.loop = loop
        self.calls = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedProvider":
        spec = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(responses=spec["responses"], loop=bool(spec.get("loop", False)))

    def complete(self, request: ChatRequest, resolve_image) -> ChatResponse:
        idx = self.calls
        self.calls += 1
        if idx >= len(self.responses):
            if not self.loop:
                raise PreconditionError("scripted provider ran out of responses")
            idx = idx % len(self.responses)
        return ChatResponse(raw_text=self.responses[idx], latency_ms=0.0)


class CallableProvider:
    """Adapts a plain function (request, resolve_image) -> str."""

    def __init__(self, fn: Callable[[ChatRequest, Callable[[str], bytes]], str]):
        self.fn = fn
        self.calls = 0

    def complete(self, request: ChatRequest, resolve_image) -> ChatResponse:
        self.calls += 1
        return ChatResponse(raw_text=self.fn(request, resolve_image), latency_ms=0.0)


class ScriptedTransport:
    """Transport replaying (status, body) pairs; for retry-path tests."""

    def __init__(self, sequence: list[tuple[int, object]]):
        self.sequence = list(sequence)
        self.requests: list[dict] = []

    def post(self, url, headers, payload, timeout_s):
        self.requests.append({"url": url, "headers": headers, "payload": payload})
        if not self.sequence:
            raise PreconditionError("scripted transport exhausted")
        return self.sequence.pop(0)


def ok_chat_body(text: str) -> dict:
    return {
        "choices": [{"message": {"role": "assistant", "content": text}}],
        "usage": {"prompt_tokens": 10, "completion_tokens": 5},
    }
