"""Error taxonomy shared by every module.

Each error carries a stable machine-readable ``code`` so the HTTP service and
CLI can surface failures without string matching.
"""


class ShortformError(Exception):
    code = "internal"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


class DomainError(ShortformError):
    """An argument violated a documented precondition."""

    code = "domain_error"


class ProviderUnavailable(ShortformError):
    """Transport to a live provider failed after all retries."""

    code = "provider_unavailable"


class EmptyCompletion(ShortformError):
    code = "empty_completion"


class BadMedia(ShortformError):
    """Media file missing, unreadable, or undecodable."""

    code = "bad_media"


class UnknownVoice(ShortformError):
    code = "unknown_voice"


class FixtureMissing(ShortformError):
    """A fake provider needed a sidecar fixture file that does not exist."""

    code = "fixture_missing"


class NoSpeech(ShortformError):
    code = "no_speech"


class GenerationFailed(ShortformError):
    """The model kept returning malformed completions past the retry budget."""

    code = "generation_failed"


class InsufficientClips(ShortformError):
    code = "insufficient_clips"


class NotFound(ShortformError):
    code = "not_found"


class Conflict(ShortformError):
    """Optimistic concurrency check failed; caller must refetch."""

    code = "conflict"


class RenderFailed(ShortformError):
    code = "render_failed"


class EmptyTimeline(ShortformError):
    code = "empty_timeline"


class ParseError(ShortformError):
    """A structured model completion did not match its required format."""

    code = "parse_error"

    def __init__(self, fmt: str, message: str):
        super().__init__(f"{fmt}: {message}")
        self.fmt = fmt
