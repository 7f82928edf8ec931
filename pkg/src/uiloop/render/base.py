"""Rendering contracts: viewport, result values, and the context pool.

Page-level problems are *values* (a Failure result), never exceptions, so
reward scoring can apply its render-failure penalty without try/except at
every call site. Only infrastructure faults (an exhausted pool) raise.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

from ..errors import PoolExhaustedError, PreconditionError
from ..store import HtmlDocument, ImageRef

DEFAULT_PAGE_HEIGHT_CAP_PX = 8192


@dataclass(frozen=True)
class Viewport:
    width_px: int = 1280
    height_px: int = 0  # 0 = full page
    device_scale: int = 1

    def __post_init__(self):
        if self.width_px < 320:
            raise PreconditionError("viewport width must be >= 320px")
        if self.height_px < 0:
            raise PreconditionError("viewport height must be >= 0")
        if self.device_scale not in (1, 2):
            raise PreconditionError("device_scale must be 1 or 2")

    def to_dict(self) -> dict:
        return {"width_px": self.width_px, "height_px": self.height_px, "device_scale": self.device_scale}

    @staticmethod
    def from_dict(d: dict) -> "Viewport":
        return Viewport(**d)


class RenderFailureReason(str, Enum):
    NAVIGATION_ERROR = "navigation-error"
    SCRIPT_FATAL = "script-fatal"
    TIMEOUT = "timeout"
    PROTOCOL_ERROR = "protocol-error"


@dataclass(frozen=True)
class RenderResult:
    image: ImageRef | None = None
    page_height_px: int | None = None
    failure: RenderFailureReason | None = None

    def __post_init__(self):
        if (self.failure is None) == (self.image is None):
            raise PreconditionError("a render result is either an image or a failure reason")

    @property
    def ok(self) -> bool:
        return self.failure is None

    @staticmethod
    def success(image: ImageRef, page_height_px: int) -> "RenderResult":
        return RenderResult(image=image, page_height_px=page_height_px)

    @staticmethod
    def failed(reason: RenderFailureReason) -> "RenderResult":
        return RenderResult(failure=reason)

    def to_dict(self) -> dict:
        if self.ok:
            return {"ok": True, "image": self.image.to_dict(), "page_height_px": self.page_height_px}
        return {"ok": False, "failure": self.failure.value}

    @staticmethod
    def from_dict(d: dict) -> "RenderResult":
        if d["ok"]:
            return RenderResult.success(ImageRef.from_dict(d["image"]), d["page_height_px"])
        return RenderResult.failed(RenderFailureReason(d["failure"]))


class RenderEngine(Protocol):
    def render_once(self, doc: HtmlDocument, viewport: Viewport, timeout_s: float) -> RenderResult:
        ...

    def close(self) -> None:
        ...


class RendererPool:
    """Bounds concurrent renders; each render owns one context exclusively."""

    def __init__(self, engine: RenderEngine, size: int = 2, acquire_timeout_s: float = 60.0):
        if size < 1:
            raise PreconditionError("pool size must be >= 1")
        self.engine = engine
        self.size = size
        self.acquire_timeout_s = acquire_timeout_s
        self._slots = threading.Semaphore(size)

    def render(self, doc: HtmlDocument, viewport: Viewport, timeout_s: float) -> RenderResult:
        if not doc.source.strip():
            raise PreconditionError("refusing to render an empty document")
        if not self._slots.acquire(timeout=self.acquire_timeout_s):
            raise PoolExhaustedError(f"no renderer context free after {self.acquire_timeout_s}s")
        try:
            return self.engine.render_once(doc, viewport, timeout_s)
        finally:
            self._slots.release()

    def render_batch(self, docs: list[HtmlDocument], viewport: Viewport,
                     timeout_s: float) -> list[RenderResult]:
        if not docs:
            return []
        workers = min(self.size, len(docs))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(self.render, doc, viewport, timeout_s) for doc in docs]
            return [f.result() for f in futures]

    def close(self) -> None:
        self.engine.close()
