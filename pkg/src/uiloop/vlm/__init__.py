from .client import (
    ChatClient,
    ChatRequest,
    ChatResponse,
    DecodeParams,
    HttpJsonProvider,
    ImagePart,
    Message,
    Provider,
    ProviderProfile,
    RetryPolicy,
    TextPart,
    TokenUsage,
    user_message,
)
from .parsing import StructuredAnswer, extract_answer, extract_boxed

__all__ = [
    "ChatClient",
    "ChatRequest",
    "ChatResponse",
    "DecodeParams",
    "HttpJsonProvider",
    "ImagePart",
    "Message",
    "Provider",
    "ProviderProfile",
    "RetryPolicy",
    "StructuredAnswer",
    "TextPart",
    "TokenUsage",
    "extract_answer",
    "extract_boxed",
    "user_message",
]
