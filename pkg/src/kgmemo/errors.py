"""Exception hierarchy shared across the package."""


class KgmemoError(Exception):
    """Base class for all package errors."""


class InvalidArgument(KgmemoError):
    """Caller supplied an out-of-contract value."""


class SchemaViolation(KgmemoError):
    """Graph mutation would break the typed-graph schema."""


class NotFound(KgmemoError):
    """Referenced node, edge, trace or scope does not exist."""


class ConfigConflict(KgmemoError):
    """Persisted state is incompatible with the active configuration."""


class EmptySeedError(KgmemoError):
    """Seed selection ran against a graph with no entity nodes."""


class BuildInProgress(KgmemoError):
    """A corpus build is already running for this session."""


class TransportError(KgmemoError):
    """A provider call failed at the network level; retriable."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


class ParseError(KgmemoError):
    """Provider output did not match the expected grammar, even after a re-ask."""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class ProviderError(KgmemoError):
    """Provider rejected the request or returned an unusable payload."""
