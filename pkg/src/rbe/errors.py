"""Exception hierarchy shared across the package."""


class RBEError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RBEError):
    """Bad user-supplied input: files, flags, ids, or thresholds."""


class RuleSyntaxError(ValidationError):
    """Rule DSL could not be parsed.

    Carries the byte offset of the first offending character.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class StaleIndexError(RBEError):
    """Exemplar index was built from a different checkpoint."""
