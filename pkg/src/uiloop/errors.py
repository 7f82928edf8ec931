"""Exception hierarchy shared by all uiloop modules.

Every failure the engine can surface has a typed class so callers can
branch on kind instead of string-matching messages.
"""


class UiLoopError(Exception):
    """Base class for all uiloop errors."""


class PreconditionError(UiLoopError):
    """An operation was called with inputs violating its contract."""


# --- store ---------------------------------------------------------------

class StoreError(UiLoopError):
    pass


class UnknownSessionError(StoreError):
    pass


class CorruptLogError(StoreError):
    """A persisted session log failed its per-line integrity check."""


class BlobMissingError(StoreError):
    pass


# --- provider / transport ------------------------------------------------

class ProviderError(UiLoopError):
    pass


class UnknownProviderError(ProviderError):
    pass


class AuthFailureError(ProviderError):
    pass


class RateLimitedError(ProviderError):
    """HTTP 429 persisted after the retry budget was spent."""


class ProviderTimeoutError(ProviderError):
    pass


class MalformedProviderResponseError(ProviderError):
    pass


# --- answer / verdict parsing --------------------------------------------

class ParseError(UiLoopError):
    pass


class MalformedTagsError(ParseError):
    """An opening think/answer tag has no matching closing tag."""


class NoBoxedContentError(ParseError):
    pass


class UnbalancedBracesError(ParseError):
    pass


class VerdictParseError(ParseError):
    """Judge output did not contain the scores/conclusion it was asked for."""


# --- prompt registry -------------------------------------------------------

class PromptError(UiLoopError):
    pass


class UnknownTemplateError(PromptError):
    pass


class UnknownVersionError(PromptError):
    pass


class TemplateIntegrityError(PromptError):
    """A template body no longer matches its recorded content hash."""


class MissingSlotError(PromptError):
    pass


class ImageArityMismatchError(PromptError):
    pass


# --- rendering -------------------------------------------------------------

class RenderError(UiLoopError):
    """Infrastructure-level render failure (page-level failures are values)."""


class PoolExhaustedError(RenderError):
    pass


# --- session / extraction ---------------------------------------------------

class SessionError(UiLoopError):
    pass


class ExtractionFailedError(SessionError):
    """No HTML document could be extracted from a model answer."""


class TtsAbortedError(SessionError):
    """A refinement run hit a render failure; the partial session is persisted."""

    def __init__(self, message: str, session_id: str):
        super().__init__(message)
        self.session_id = session_id


# --- judge ------------------------------------------------------------------

class JudgeError(UiLoopError):
    """A judge call failed after its retry budget (transport or parsing)."""


# --- evaluation ---------------------------------------------------------------

class ManifestError(UiLoopError):
    pass


class EmptyManifestError(ManifestError):
    """Accuracy over zero samples is undefined."""


# --- configuration -------------------------------------------------------------

class ConfigError(UiLoopError):
    pass
