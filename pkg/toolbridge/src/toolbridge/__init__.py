"""Bridges between production type checkers / detector processes and the
variable-misuse toolkit's diagnostic taxonomy and wire protocol."""

from toolbridge.checkers import (
    CheckerAdapterConfig,
    Diagnostic,
    ParseFailure,
    TAXONOMY,
    ToolCrashed,
    ToolMissing,
    run_external_check,
    tool_version,
)
from toolbridge.server import serve_detector

__version__ = "0.1.0"

__all__ = [
    "CheckerAdapterConfig",
    "Diagnostic",
    "ParseFailure",
    "TAXONOMY",
    "ToolCrashed",
    "ToolMissing",
    "run_external_check",
    "serve_detector",
    "tool_version",
]
