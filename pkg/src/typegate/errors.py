"""Exception types shared across the toolkit."""

from __future__ import annotations


class TypegateError(Exception):
    """Base class for all toolkit errors."""


class SourceError(TypegateError):
    """Error anchored to a source position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class LexError(SourceError):
    """Malformed input at the token level (bad literal, inconsistent indentation)."""


class ParseError(SourceError):
    """Structurally malformed input."""


class UnsupportedSyntax(SourceError):
    """Recognizable construct outside the supported language subset."""


class StubError(TypegateError):
    """Malformed or duplicate declarations in companion stub source."""


class NoSiteError(TypegateError):
    """Bug injection requested on a sample with no usable injection site."""


class SchemaError(TypegateError):
    """Corpus line violating the JSONL schema."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class UnlabeledSample(TypegateError):
    """Operation requiring type_related labels met an unlabeled buggy sample."""


class NoReplacementPool(TypegateError):
    """Training-set filtering found no non-type-related bugs to oversample."""


class MissingOutcome(TypegateError):
    """Metric tally is missing the outcome for a corpus sample."""


class NoCrossover(TypegateError):
    """The two precision/recall pairs do not cross at any beta."""


class ProtocolError(TypegateError):
    """External detector emitted a malformed or out-of-order frame."""


class DetectorCrashed(TypegateError):
    """External detector process exited mid-conversation."""


class DetectorTimeout(TypegateError):
    """External detector did not answer within the per-sample deadline."""
