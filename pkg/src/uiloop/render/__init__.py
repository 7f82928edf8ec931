from .base import (
    RenderFailureReason,
    RenderResult,
    RendererPool,
    Viewport,
)
from .builtin import BuiltinEngine

__all__ = [
    "BuiltinEngine",
    "RenderFailureReason",
    "RenderResult",
    "RendererPool",
    "Viewport",
]
