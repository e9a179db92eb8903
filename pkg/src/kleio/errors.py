"""Exception types raised across the kleio pipeline."""


class KleioError(Exception):
    """Base class for all kleio errors."""


# --- corpus ingestion ---

class PathNotFound(KleioError):
    """The given ingestion path does not exist."""


class NoTextLayer(KleioError):
    """A PDF has no extractable text; the file must be OCR'ed first."""


class EmptyDocument(KleioError):
    """Text extraction produced only whitespace."""


class MalformedFile(KleioError):
    """The payload could not be parsed as the declared format."""


# --- embedding ---

class EmptyInput(KleioError):
    """An embedding request contained no texts, or an empty text."""


class BackendUnreachable(KleioError):
    """An HTTP backend could not be reached after retries."""


class BackendError(KleioError):
    """An HTTP backend returned a non-2xx response."""

    def __init__(self, status_code, body=""):
        super().__init__(f"backend returned HTTP {status_code}: {body[:200]}")
        self.status_code = status_code
        self.body = body


class DimensionMismatch(KleioError):
    """A vector's length does not match the expected dimension."""


# --- vector index persistence ---

class FormatVersionMismatch(KleioError):
    """A persisted index was written with an unsupported format version."""


class CorruptIndex(KleioError):
    """A persisted index failed checksum or size validation."""


# --- LLM gateway ---

class ContextOverflow(KleioError):
    """The prompt estimate exceeds the model's context budget."""


# --- batch question answering ---

class InputCsvMalformed(KleioError):
    """The batch input CSV is missing the required header or is unreadable."""


class PipelineError(KleioError):
    """A pipeline stage failed; carries the stage name for batch reports."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


# --- grading ---

class DuplicateGrade(KleioError):
    """The same (id, model_id, k) was graded more than once."""


class UnknownCategory(KleioError):
    """A grade or question names a category outside the known four."""


# --- genealogical extraction ---

class PageTooLarge(KleioError):
    """A page plus the extraction prompt exceeds the model's context budget."""


class NoTableFound(KleioError):
    """A model response contained no recognizable table."""


class HeaderUnrecognized(KleioError):
    """A table was found but its header names no known column."""


class ValidationError(KleioError):
    """A field value does not match its expected grammar."""

    def __init__(self, message, raw=""):
        super().__init__(message)
        self.raw = raw
