"""Exception types shared across the package.

Every error a caller is expected to handle has its own class; generic
ValueError is reserved for programming mistakes (invariant violations at
construction time raise CorpusValidationError or ValueError depending on
whether an entry context exists).
"""

from __future__ import annotations


class GeobenchError(Exception):
    """Base class for all package-specific errors."""


class CorpusParseError(GeobenchError):
    """Malformed corpus XML. Carries the parser's line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class CorpusValidationError(GeobenchError):
    """Well-formed XML that violates a corpus invariant.

    Names the offending entry (and span, when the failure is span-level)
    so upload errors are actionable.
    """

    def __init__(self, message: str, entry_id: str | None = None):
        self.entry_id = entry_id
        if entry_id is not None:
            message = f"entry {entry_id!r}: {message}"
        super().__init__(message)


class ConversionError(GeobenchError):
    """Line-based corpus conversion cannot proceed (e.g. missing mapped column)."""


class GazetteerError(GeobenchError):
    """Gazetteer file unusable (zero valid rows, unreadable, ...)."""


class OutputContractError(GeobenchError):
    """Geoparser output JSON violates the documented response contract."""


class TransportError(GeobenchError):
    """Remote geoparser unreachable after retries, or permanent HTTP failure."""

    def __init__(self, message: str, status: int | None = None, permanent: bool = False):
        self.status = status
        self.permanent = permanent
        super().__init__(message)


class GeoparseRunError(GeobenchError):
    """One or more corpus entries failed during a geoparse run.

    Raised by the caching layer so a partially failed run is never persisted.
    """

    def __init__(self, message: str, failed_entry_ids: list[str] | None = None):
        self.failed_entry_ids = failed_entry_ids or []
        super().__init__(message)


class InvalidExperimentId(GeobenchError):
    """Experiment id does not match the 16-character A-Z0-9 format."""


class StoreError(GeobenchError):
    """The durable store is unreachable or rejected an operation."""
