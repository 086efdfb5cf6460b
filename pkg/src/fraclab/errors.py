"""Exception hierarchy shared by all fraclab modules."""


class FraclabError(Exception):
    """Base class for every error raised by fraclab."""


class PreconditionError(FraclabError, ValueError):
    """An input violates the documented precondition of an operation."""


class ResourceError(FraclabError):
    """An enumeration would exceed the configured cell cap."""

    def __init__(self, message, depth=None, limit=None):
        super().__init__(message)
        self.depth = depth
        self.limit = limit


class DomainError(FraclabError, ValueError):
    """A point lies outside the domain where a map is defined."""


class NotFoundError(FraclabError, KeyError):
    """A requested word or map is not part of the system."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class UnsupportedError(FraclabError):
    """The input is valid but outside the class of systems handled here."""
