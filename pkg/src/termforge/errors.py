"""Exception types shared across the package.

Everything raised by the public API derives from TermforgeError, so callers
can catch a single base class. The CLI maps each concrete class to a stable
exit code (see the CLI reference in the README).
"""
from __future__ import annotations


class TermforgeError(Exception):
    """Base class for all errors raised by this package."""


# --- dictionary registry ---------------------------------------------------

class UnknownKind(TermforgeError):
    """No adapter is registered under the requested dictionary-type name."""


class DuplicateKind(TermforgeError):
    """An adapter is already registered under this dictionary-type name."""


class InvalidAdapter(TermforgeError):
    """An adapter violates its structural invariants."""


# --- source parsing and building -------------------------------------------

class SourceRowError(TermforgeError):
    """Base for errors attributable to one row of a source file."""

    def __init__(self, reason: str, *, file: str = "", line: int = 0):
        self.reason = reason
        self.file = file
        self.line = line
        where = f"{file}:{line}: " if file else ""
        super().__init__(f"{where}{reason}")


class MalformedRow(SourceRowError):
    """A source row that cannot be interpreted (bad field count, flag, status, duplicate)."""


class CodeWidthError(SourceRowError):
    """A code does not match the adapter's code shape."""


class DanglingParent(SourceRowError):
    """A parent link references a code absent from the concept file."""


class MissingColumn(TermforgeError):
    """A source file header does not match the adapter schema."""


class CycleDetected(TermforgeError):
    """Parent links contain a directed cycle."""


class AlreadyBuilt(TermforgeError):
    """The store already holds data for this dictionary; pass overwrite to rebuild."""


# --- store ------------------------------------------------------------------

class NotFound(TermforgeError):
    """A required file or directory does not exist."""


class PermissionDenied(TermforgeError):
    """The store file cannot be opened or written as requested."""


class CorruptStore(TermforgeError):
    """The store file fails its integrity check."""


class AlreadyExists(TermforgeError):
    """Schema for this dictionary already exists in the store."""


class SchemaMissing(TermforgeError):
    """The store does not contain tables for the requested dictionary."""


class StoreBusy(TermforgeError):
    """Another writer currently holds the store."""


class UnknownBackend(TermforgeError):
    """The store config names a backend this build does not provide."""


# --- query DSL ---------------------------------------------------------------

class PredicateSyntaxError(TermforgeError):
    """The predicate text cannot be parsed.

    ``pos`` is a 0-based character offset into the input; ``expected``
    describes what the parser would have accepted there.
    """

    def __init__(self, message: str, pos: int, expected: str = ""):
        self.pos = pos
        self.expected = expected
        detail = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at position {pos}{detail}")


class UnknownField(TermforgeError):
    """A predicate references a field absent from the adapter schema."""

    def __init__(self, name: str, available: tuple[str, ...], pos: int | None = None):
        self.name = name
        self.available = available
        self.pos = pos
        super().__init__(
            f"unknown field {name!r}; available fields: {', '.join(available)}"
        )


# --- relations ----------------------------------------------------------------

class UnknownCode(TermforgeError):
    """The queried code does not exist in the dictionary."""


# --- CLI configuration ----------------------------------------------------------

class BadJson(TermforgeError):
    """A config file is not valid JSON."""


class MissingKey(TermforgeError):
    """A required config key is absent."""

    def __init__(self, key: str, detail: str = ""):
        self.key = key
        msg = f"missing required config key {key!r}"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)
