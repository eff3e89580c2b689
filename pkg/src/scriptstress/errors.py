"""Exception hierarchy.

Fatal errors (``InputError``, ``ConfigError``) abort a run. Everything derived
from ``PageError`` is isolated to one document or page and the batch goes on.
"""


class ScriptStressError(Exception):
    pass


class InputError(ScriptStressError):
    """Input directory missing or unreadable."""


class ConfigError(ScriptStressError):
    pass


class PageError(ScriptStressError):
    """A failure scoped to one document or page; ``label`` names it."""

    def __init__(self, label: str, message: str):
        super().__init__(f"{label}: {message}")
        self.label = label


class DocumentError(PageError):
    pass


class PreprocessError(PageError):
    pass


class AggregationError(ScriptStressError):
    pass


class BackendUnavailable(ScriptStressError):
    def __init__(self, backend_id: str, reason: str = ""):
        super().__init__(f"backend {backend_id!r} unavailable" + (f": {reason}" if reason else ""))
        self.backend_id = backend_id


class BackendProtocolError(ScriptStressError):
    """Backend answered, but the payload breaks the wire contract."""
