"""typegate: type-checker-aware tooling for variable-misuse bug detection."""

__version__ = "0.1.0"
