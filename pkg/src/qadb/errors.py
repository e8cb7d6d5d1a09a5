"""Exception types shared across the package."""


class QADBError(Exception):
    """Base class for all package errors."""


class EmptyDocument(QADBError):
    """Document body is empty after whitespace normalization."""


class DuplicateId(QADBError):
    """A passage id occurred more than once during ingestion."""


class ParseError(QADBError):
    """A line-delimited input record could not be parsed."""


class BackendUnavailable(QADBError):
    """The remote generation backend could not be reached after retries."""


class ProtocolError(QADBError):
    """The backend reply (or prompt) violated the generation protocol."""


class FormatVersionError(QADBError):
    """A persisted file declares a format version newer than this code."""


class CorruptDatabase(QADBError):
    """A persisted database file is truncated or internally inconsistent."""


class EmbeddingDimMismatch(QADBError):
    """An embedder returned vectors of inconsistent dimensionality."""


class ModeUnavailable(QADBError):
    """The requested retrieval mode is not supported by this index."""


class ContractViolation(QADBError):
    """An operation was called with arguments outside its contract."""
