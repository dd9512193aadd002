"""Lexer for the analyzed function subset.

Produces a flat token stream with synthetic indent/dedent/newline tokens.
Every token records the trivia (whitespace, comments, escaped newlines)
that precedes it, so ``"".join(t.leading + t.text for t in tokens)``
reproduces the input byte for byte.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from typegate.errors import LexError

TAB_WIDTH = 8  # tabs advance to the next multiple of this for column numbering


class TokenKind(enum.Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    NUMBER = "number"
    STRING = "string"
    OPERATOR = "operator"
    DELIMITER = "delimiter"
    NEWLINE = "newline"
    INDENT = "indent"
    DEDENT = "dedent"


@dataclass(frozen=True)
class SourceSpan:
    """Position of a token: 1-based line, 0-based column, index in the token stream."""

    line: int
    column: int
    token_index: int


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan
    leading: str = field(default="", compare=False)

    def is_op(self, *texts: str) -> bool:
        return self.kind in (TokenKind.OPERATOR, TokenKind.DELIMITER) and self.text in texts

    def is_kw(self, *words: str) -> bool:
        return self.kind is TokenKind.KEYWORD and self.text in words


KEYWORDS = frozenset(
    {
        "def", "return", "yield", "if", "elif", "else", "for", "while",
        "in", "is", "and", "or", "not", "None", "True", "False",
        "import", "from", "as", "del", "pass", "break", "continue",
        "lambda", "class",
        # reserved words outside the supported subset; the parser rejects them
        "async", "await", "try", "except", "finally", "with", "raise",
        "global", "nonlocal", "assert",
    }
)

# longest-match-first operator/delimiter table
_OPERATORS = [
    "**=", "//=", ">>=", "<<=", "...", "->", ":=",
    "==", "!=", ">=", "<=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=",
    "**", "//", ">>", "<<",
    "+", "-", "*", "/", "%", "@", "&", "|", "^", "~", "<", ">", "=",
    "(", ")", "[", "]", "{", "}", ",", ":", ".", ";",
]
_DELIMITER_TEXTS = frozenset({"(", ")", "[", "]", "{", "}", ",", ":", ".", ";", "->", "..."})
_OPENERS = {"(", "[", "{"}
_CLOSERS = {")", "]", "}"}
_STRING_PREFIXES = frozenset(
    {"", "r", "b", "f", "u", "rb", "br", "rf", "fr",
     "R", "B", "F", "U", "Rb", "bR", "rB", "Br", "RB", "BR", "Rf", "fR", "rF", "Fr", "RF", "FR"}
)


def _is_ident_start(ch: str) -> bool:
    return ch == "_" or ch.isalpha()


def _is_ident_part(ch: str) -> bool:
    return ch == "_" or ch.isalnum()


class _Lexer:
    def __init__(self, source: str):
        self.src = source
        self.n = len(source)
        self.i = 0
        self.line = 1
        self.col = 0
        self.tokens: list[Token] = []
        self.trivia: list[str] = []
        self.indents = [0]
        self.depth = 0  # bracket nesting
        self.line_has_tokens = False

    # -- low-level cursor -------------------------------------------------

    def _peek(self, k: int = 0) -> str:
        j = self.i + k
        return self.src[j] if j < self.n else ""

    def _advance(self, count: int = 1) -> str:
        taken = self.src[self.i : self.i + count]
        for ch in taken:
            if ch == "\n":
                self.line += 1
                self.col = 0
            elif ch == "\t":
                self.col = (self.col // TAB_WIDTH + 1) * TAB_WIDTH
            else:
                self.col += 1
        self.i += len(taken)
        return taken

    def _emit(self, kind: TokenKind, text: str, line: int, col: int) -> None:
        span = SourceSpan(line, col, len(self.tokens))
        self.tokens.append(Token(kind, text, span, "".join(self.trivia)))
        self.trivia.clear()
        if kind not in (TokenKind.INDENT, TokenKind.DEDENT, TokenKind.NEWLINE):
            self.line_has_tokens = True

    def _error(self, message: str) -> LexError:
        return LexError(message, self.line, self.col)

    # -- line structure ----------------------------------------------------

    def _consume_indentation(self) -> None:
        """At the start of a logical line: measure indent, fold blank/comment lines into trivia."""
        while True:
            start = self.i
            width = 0
            while self._peek() in (" ", "\t"):
                width = width + 1 if self._peek() == " " else (width // TAB_WIDTH + 1) * TAB_WIDTH
                self._advance()
            ch = self._peek()
            if ch == "#":
                while self._peek() not in ("", "\n"):
                    self._advance()
                continue_after = True
            elif ch == "\n" or (ch == "\r" and self._peek(1) == "\n"):
                continue_after = True
            elif ch == "":
                self.trivia.append(self.src[start : self.i])
                return
            else:
                continue_after = False
            if continue_after:
                if self._peek() == "\r":
                    self._advance()
                if self._peek() == "\n":
                    self._advance()
                self.trivia.append(self.src[start : self.i])
                if self._peek() == "":
                    return
                continue
            self.trivia.append(self.src[start : self.i])
            self._apply_indent(width)
            return

    def _apply_indent(self, width: int) -> None:
        if width > self.indents[-1]:
            self.indents.append(width)
            self._emit(TokenKind.INDENT, "", self.line, self.col)
        else:
            while width < self.indents[-1]:
                self.indents.pop()
                self._emit(TokenKind.DEDENT, "", self.line, self.col)
            if width != self.indents[-1]:
                raise self._error("inconsistent indentation")

    # -- token scanners ----------------------------------------------------

    def _scan_string(self) -> None:
        line, col, start = self.line, self.col, self.i
        prefix_end = self.i
        while prefix_end < self.n and self.src[prefix_end].isalpha() and prefix_end - self.i < 2:
            prefix_end += 1
        prefix = self.src[self.i : prefix_end]
        if prefix and prefix not in _STRING_PREFIXES:
            raise self._error(f"unknown string prefix {prefix!r}")
        quote_pos = prefix_end
        if quote_pos >= self.n or self.src[quote_pos] not in "'\"":
            raise self._error("malformed string literal")
        q = self.src[quote_pos]
        triple = self.src[quote_pos : quote_pos + 3] in (q * 3,)
        self._advance(prefix_end - self.i)
        self._advance(3 if triple else 1)
        closer = q * 3 if triple else q
        while True:
            ch = self._peek()
            if ch == "":
                raise LexError("unterminated string literal", line, col)
            if ch == "\\":
                if self.i + 1 >= self.n:
                    raise LexError("unterminated string literal", line, col)
                self._advance(2)
                continue
            if not triple and ch == "\n":
                raise LexError("unterminated string literal", line, col)
            if self.src.startswith(closer, self.i):
                self._advance(len(closer))
                break
            self._advance()
        self._emit(TokenKind.STRING, self.src[start : self.i], line, col)

    def _scan_number(self) -> None:
        line, col, start = self.line, self.col, self.i

        def digits(valid: str) -> int:
            count = 0
            while True:
                ch = self._peek()
                if ch and ch in valid:
                    pass
                elif ch == "_" and self._peek(1) and self._peek(1) in valid:
                    pass
                else:
                    return count
                self._advance()
                count += 1

        if self._peek() == "0" and self._peek(1) in "xXoObB":
            base = self._peek(1).lower()
            self._advance(2)
            valid = {"x": "0123456789abcdefABCDEF", "o": "01234567", "b": "01"}[base]
            if digits(valid) == 0:
                raise self._error("malformed number literal")
        else:
            digits("0123456789")
            if self._peek() == "." and self._peek(1).isdigit():
                self._advance()
                digits("0123456789")
            elif self._peek() == "." and not _is_ident_start(self._peek(1)) and self._peek(1) != ".":
                self._advance()
                digits("0123456789")
            if self._peek() and self._peek() in "eE" and (
                self._peek(1).isdigit()
                or (self._peek(1) and self._peek(1) in "+-" and self._peek(2).isdigit())
            ):
                self._advance(2 if self._peek(1) in "+-" else 1)
                digits("0123456789")
            elif self._peek() and self._peek() in "eE" and _is_ident_part(self._peek(1)):
                raise self._error("malformed number literal")
        if self._peek() and self._peek() in "jJ":
            self._advance()
        if _is_ident_start(self._peek()):
            raise self._error("malformed number literal")
        self._emit(TokenKind.NUMBER, self.src[start : self.i], line, col)

    def _scan_name(self) -> None:
        line, col, start = self.line, self.col, self.i
        while _is_ident_part(self._peek()):
            self._advance()
        text = self.src[start : self.i]
        kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENTIFIER
        self._emit(kind, text, line, col)

    def _scan_operator(self) -> None:
        line, col = self.line, self.col
        for op in _OPERATORS:
            if self.src.startswith(op, self.i):
                self._advance(len(op))
                if op in _OPENERS:
                    self.depth += 1
                elif op in _CLOSERS and self.depth > 0:
                    self.depth -= 1
                kind = TokenKind.DELIMITER if op in _DELIMITER_TEXTS else TokenKind.OPERATOR
                self._emit(kind, op, line, col)
                return
        raise self._error(f"unexpected character {self._peek()!r}")

    # -- driver --------------------------------------------------------------

    def run(self) -> list[Token]:
        at_line_start = True
        while True:
            if at_line_start and self.depth == 0:
                self.line_has_tokens = False
                self._consume_indentation()
                at_line_start = False
                if self.i >= self.n:
                    break
                continue
            ch = self._peek()
            if ch == "":
                break
            if ch in (" ", "\t"):
                start = self.i
                while self._peek() in (" ", "\t"):
                    self._advance()
                self.trivia.append(self.src[start : self.i])
            elif ch == "#":
                start = self.i
                while self._peek() not in ("", "\n"):
                    self._advance()
                self.trivia.append(self.src[start : self.i])
            elif ch == "\\" and self._peek(1) in ("\n", "\r"):
                start = self.i
                self._advance(2 if self._peek(1) == "\n" else 3)
                self.trivia.append(self.src[start : self.i])
            elif ch == "\n" or (ch == "\r" and self._peek(1) == "\n"):
                line, col, start = self.line, self.col, self.i
                self._advance(2 if ch == "\r" else 1)
                if self.depth > 0:
                    self.trivia.append(self.src[start : self.i])
                    # not a logical line break: indentation rules stay off
                elif self.line_has_tokens:
                    self._emit(TokenKind.NEWLINE, self.src[start : self.i], line, col)
                    at_line_start = True
                else:
                    self.trivia.append(self.src[start : self.i])
                    at_line_start = True
            elif _is_ident_start(ch):
                if ch in "rbfuRBFU":
                    j = self.i
                    while j < self.n and self.src[j].isalpha() and j - self.i < 2:
                        j += 1
                    if j < self.n and self.src[j] in "'\"" and self.src[self.i : j] in _STRING_PREFIXES:
                        self._scan_string()
                        continue
                self._scan_name()
            elif ch.isdigit() or (ch == "." and self._peek(1).isdigit()):
                self._scan_number()
            elif ch in "'\"":
                self._scan_string()
            else:
                self._scan_operator()
        # EOF: close the last logical line, park leftover trivia, close blocks
        if self.line_has_tokens:
            self._emit(TokenKind.NEWLINE, "", self.line, self.col)
        if self.trivia:
            self._emit(TokenKind.NEWLINE, "", self.line, self.col)
        while len(self.indents) > 1:
            self.indents.pop()
            self._emit(TokenKind.DEDENT, "", self.line, self.col)
        return self.tokens


def tokenize(source: str) -> list[Token]:
    """Tokenize one function sample (optionally preceded by import/stub lines).

    Deterministic; raises LexError with position on malformed literals or
    inconsistent indentation.
    """
    return _Lexer(source).run()


def render(tokens: list[Token]) -> str:
    """Inverse of tokenize: reproduce source text byte for byte."""
    return "".join(t.leading + t.text for t in tokens)
