"""Tokenizer, parser and occurrence extraction for the analyzed subset."""

from typegate.source.occurrences import IdentifierOccurrence, identifier_occurrences
from typegate.source.syntax import SyntaxTree, Usage, parse_function, parse_stub_declarations
from typegate.source.tokens import SourceSpan, Token, TokenKind, render, tokenize

__all__ = [
    "IdentifierOccurrence",
    "SourceSpan",
    "SyntaxTree",
    "Token",
    "TokenKind",
    "Usage",
    "identifier_occurrences",
    "parse_function",
    "parse_stub_declarations",
    "render",
    "tokenize",
]
