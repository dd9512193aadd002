"""Recursive-descent parser for the supported function subset.

The tree covers: module-level imports and stub declarations followed by a
single function definition; assignments (plain/augmented/annotated), if/elif/
else, for, while, return, yield, del, pass/break/continue and expression
statements; calls, attribute access, subscripts and slices, unary/binary/
compare/boolean operators, and literal displays. Constructs outside the
subset raise UnsupportedSyntax with their position; malformed input raises
ParseError.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from typegate.errors import ParseError, UnsupportedSyntax
from typegate.source.tokens import SourceSpan, Token, TokenKind


class Usage(enum.Enum):
    LOAD = "load"
    STORE = "store"
    DELETE = "delete"
    PARAM = "param"
    ANNOTATION = "annotation"


@dataclass(frozen=True, kw_only=True)
class Node:
    span: SourceSpan
    end_ti: int  # index of the last token of this node


# -- expressions --------------------------------------------------------------


@dataclass(frozen=True, kw_only=True)
class Expr(Node):
    pass


@dataclass(frozen=True, kw_only=True)
class Name(Expr):
    id: str
    ctx: Usage = Usage.LOAD


@dataclass(frozen=True, kw_only=True)
class NumberLit(Expr):
    text: str
    numeric_kind: str  # "int" | "float" | "complex"


@dataclass(frozen=True, kw_only=True)
class StringLit(Expr):
    text: str
    is_bytes: bool = False
    is_fstring: bool = False


@dataclass(frozen=True, kw_only=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True, kw_only=True)
class NoneLit(Expr):
    pass


@dataclass(frozen=True, kw_only=True)
class EllipsisLit(Expr):
    pass


@dataclass(frozen=True, kw_only=True)
class TupleLit(Expr):
    elts: tuple[Expr, ...]


@dataclass(frozen=True, kw_only=True)
class ListLit(Expr):
    elts: tuple[Expr, ...]


@dataclass(frozen=True, kw_only=True)
class SetLit(Expr):
    elts: tuple[Expr, ...]


@dataclass(frozen=True, kw_only=True)
class DictLit(Expr):
    items: tuple[tuple[Expr, Expr], ...]


@dataclass(frozen=True, kw_only=True)
class Attribute(Expr):
    value: Expr
    attr: str
    attr_span: SourceSpan
    ctx: Usage = Usage.LOAD


@dataclass(frozen=True, kw_only=True)
class SliceExpr(Expr):
    lower: Expr | None
    upper: Expr | None
    step: Expr | None


@dataclass(frozen=True, kw_only=True)
class Subscript(Expr):
    value: Expr
    index: Expr
    ctx: Usage = Usage.LOAD


@dataclass(frozen=True, kw_only=True)
class Call(Expr):
    func: Expr
    args: tuple[Expr, ...]
    kwargs: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True, kw_only=True)
class BinOp(Expr):
    left: Expr
    op: str
    right: Expr


@dataclass(frozen=True, kw_only=True)
class UnaryOp(Expr):
    op: str
    operand: Expr


@dataclass(frozen=True, kw_only=True)
class BoolOp(Expr):
    op: str  # "and" | "or"
    values: tuple[Expr, ...]


@dataclass(frozen=True, kw_only=True)
class Compare(Expr):
    left: Expr
    ops: tuple[str, ...]
    comparators: tuple[Expr, ...]


@dataclass(frozen=True, kw_only=True)
class YieldExpr(Expr):
    value: Expr | None


@dataclass(frozen=True, kw_only=True)
class LambdaExpr(Expr):
    """Opaque: body identifiers are not occurrences and the value is Unknown."""


# -- statements ----------------------------------------------------------------


@dataclass(frozen=True, kw_only=True)
class Stmt(Node):
    pass


@dataclass(frozen=True, kw_only=True)
class Assign(Stmt):
    targets: tuple[Expr, ...]
    value: Expr


@dataclass(frozen=True, kw_only=True)
class AugAssign(Stmt):
    target: Expr
    op: str  # base operator without '='
    value: Expr


@dataclass(frozen=True, kw_only=True)
class AnnAssign(Stmt):
    target: Expr
    annotation: Expr
    value: Expr | None


@dataclass(frozen=True, kw_only=True)
class ExprStmt(Stmt):
    value: Expr


@dataclass(frozen=True, kw_only=True)
class Return(Stmt):
    value: Expr | None


@dataclass(frozen=True, kw_only=True)
class Delete(Stmt):
    targets: tuple[Expr, ...]


@dataclass(frozen=True, kw_only=True)
class Pass(Stmt):
    pass


@dataclass(frozen=True, kw_only=True)
class Break(Stmt):
    pass


@dataclass(frozen=True, kw_only=True)
class Continue(Stmt):
    pass


@dataclass(frozen=True, kw_only=True)
class If(Stmt):
    cond: Expr
    body: tuple[Stmt, ...]
    orelse: tuple[Stmt, ...]


@dataclass(frozen=True, kw_only=True)
class For(Stmt):
    target: Expr
    iter: Expr
    body: tuple[Stmt, ...]


@dataclass(frozen=True, kw_only=True)
class While(Stmt):
    cond: Expr
    body: tuple[Stmt, ...]


@dataclass(frozen=True, kw_only=True)
class ImportStmt(Stmt):
    bound_names: tuple[str, ...]


@dataclass(frozen=True, kw_only=True)
class Param(Node):
    name: str
    annotation: Expr | None
    default: Expr | None


@dataclass(frozen=True, kw_only=True)
class FunctionDef(Stmt):
    name: str
    name_span: SourceSpan
    params: tuple[Param, ...]
    returns: Expr | None
    body: tuple[Stmt, ...]
    is_stub: bool


@dataclass(frozen=True, kw_only=True)
class AnnField(Node):
    name: str
    annotation: Expr


@dataclass(frozen=True, kw_only=True)
class ClassStub(Stmt):
    name: str
    fields: tuple[AnnField, ...]
    methods: tuple[FunctionDef, ...]


@dataclass(frozen=True)
class SyntaxTree:
    """One parsed sample: ambient preamble plus the analyzed function."""

    preamble: tuple[Stmt, ...]
    function: FunctionDef
    tokens: tuple[Token, ...]


AUG_OPS = {"+=", "-=", "*=", "/=", "%=", "//=", "**=", "&=", "|=", "^=", ">>=", "<<="}
_UNSUPPORTED_STMT_KEYWORDS = {
    "async", "await", "try", "except", "finally", "with", "raise",
    "global", "nonlocal", "assert", "lambda",
}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    # -- cursor helpers ------------------------------------------------------

    def _peek(self, k: int = 0) -> Token | None:
        j = self.pos + k
        return self.toks[j] if j < len(self.toks) else None

    def _at_end(self) -> bool:
        return self.pos >= len(self.toks)

    def _next(self) -> Token:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of input", self._eof_line(), 0)
        self.pos += 1
        return tok

    def _eof_line(self) -> int:
        return self.toks[-1].span.line if self.toks else 1

    def _error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self._peek()
        if tok is None:
            return ParseError(message, self._eof_line(), 0)
        return ParseError(message, tok.span.line, tok.span.column)

    def _unsupported(self, message: str, tok: Token | None = None) -> UnsupportedSyntax:
        tok = tok or self._peek()
        if tok is None:
            return UnsupportedSyntax(message, self._eof_line(), 0)
        return UnsupportedSyntax(message, tok.span.line, tok.span.column)

    def _expect_op(self, text: str) -> Token:
        tok = self._peek()
        if tok is None or not tok.is_op(text):
            raise self._error(f"expected {text!r}")
        return self._next()

    def _expect_kind(self, kind: TokenKind, what: str) -> Token:
        tok = self._peek()
        if tok is None or tok.kind is not kind:
            raise self._error(f"expected {what}")
        return self._next()

    def _skip_newlines(self) -> None:
        while (tok := self._peek()) is not None and tok.kind is TokenKind.NEWLINE:
            self.pos += 1

    def _expect_newline(self) -> None:
        tok = self._peek()
        if tok is None:
            return
        if tok.kind is not TokenKind.NEWLINE:
            raise self._error("expected end of line")
        self.pos += 1

    # -- module structure ------------------------------------------------------

    def parse_sample(self) -> tuple[tuple[Stmt, ...], FunctionDef]:
        """Imports and stub declarations followed by one concrete function."""
        preamble: list[Stmt] = []
        function: FunctionDef | None = None
        self._skip_newlines()
        while not self._at_end():
            item = self._parse_module_item()
            if isinstance(item, FunctionDef) and not item.is_stub:
                if function is not None:
                    raise self._unsupported("more than one function definition", self.toks[item.span.token_index])
                function = item
            elif function is not None:
                raise self._error("statements after the function definition", self.toks[item.span.token_index])
            else:
                preamble.append(item)
            self._skip_newlines()
        if function is None:
            raise ParseError("no function definition found", self._eof_line(), 0)
        return tuple(preamble), function

    def parse_stub_items(self) -> list[Stmt]:
        """Declarations of a companion stub file: imports, def/class stubs."""
        items: list[Stmt] = []
        self._skip_newlines()
        while not self._at_end():
            item = self._parse_module_item()
            if isinstance(item, FunctionDef) and not item.is_stub:
                raise self._unsupported("stub function body must be '...'", self.toks[item.span.token_index])
            items.append(item)
            self._skip_newlines()
        return items

    def _parse_module_item(self) -> Stmt:
        tok = self._peek()
        assert tok is not None
        if tok.is_kw("import", "from"):
            return self._parse_import()
        if tok.is_kw("def"):
            return self._parse_funcdef()
        if tok.is_kw("class"):
            return self._parse_class_stub()
        if tok.is_kw("async"):
            raise self._unsupported("async definitions are not supported", tok)
        if tok.is_op("@"):
            raise self._unsupported("decorators are not supported", tok)
        raise self._unsupported(
            "only imports, stubs and one function definition are allowed at module level", tok
        )

    def _parse_import(self) -> ImportStmt:
        start = self._next()  # 'import' | 'from'
        bound: list[str] = []
        if start.text == "from":
            self._parse_dotted_name()
            kw = self._peek()
            if kw is None or not kw.is_kw("import"):
                raise self._error("expected 'import'")
            self._next()
            if (tok := self._peek()) is not None and tok.is_op("*"):
                raise self._unsupported("wildcard imports are not supported", tok)
            bound.extend(self._parse_import_names(use_last_component=True))
        else:
            bound.extend(self._parse_import_names(use_last_component=False))
        end_ti = self.pos - 1
        self._expect_newline()
        return ImportStmt(span=start.span, end_ti=end_ti, bound_names=tuple(bound))

    def _parse_dotted_name(self) -> list[str]:
        parts = [self._expect_kind(TokenKind.IDENTIFIER, "module name").text]
        while (tok := self._peek()) is not None and tok.is_op("."):
            self._next()
            parts.append(self._expect_kind(TokenKind.IDENTIFIER, "module name").text)
        return parts

    def _parse_import_names(self, use_last_component: bool) -> list[str]:
        names: list[str] = []
        while True:
            parts = self._parse_dotted_name()
            alias: str | None = None
            if (tok := self._peek()) is not None and tok.is_kw("as"):
                self._next()
                alias = self._expect_kind(TokenKind.IDENTIFIER, "alias").text
            if alias is not None:
                names.append(alias)
            elif use_last_component:
                names.append(parts[-1])
            else:
                names.append(parts[0])
            if (tok := self._peek()) is not None and tok.is_op(","):
                self._next()
                continue
            return names

    # -- definitions -------------------------------------------------------------

    def _parse_funcdef(self) -> FunctionDef:
        def_tok = self._next()
        name_tok = self._expect_kind(TokenKind.IDENTIFIER, "function name")
        self._expect_op("(")
        params = self._parse_params()
        returns: Expr | None = None
        if (tok := self._peek()) is not None and tok.is_op("->"):
            self._next()
            returns = _mark_annotation(self._parse_expr())
        self._expect_op(":")
        body = self._parse_block()
        is_stub = len(body) == 1 and isinstance(body[0], ExprStmt) and isinstance(body[0].value, EllipsisLit)
        return FunctionDef(
            span=def_tok.span,
            end_ti=body[-1].end_ti,
            name=name_tok.text,
            name_span=name_tok.span,
            params=params,
            returns=returns,
            body=body,
            is_stub=is_stub,
        )

    def _parse_params(self) -> tuple[Param, ...]:
        params: list[Param] = []
        seen: set[str] = set()
        while True:
            tok = self._peek()
            if tok is None:
                raise self._error("unterminated parameter list")
            if tok.is_op(")"):
                self._next()
                return tuple(params)
            if tok.is_op("*", "**"):
                raise self._unsupported("star parameters are not supported", tok)
            name_tok = self._expect_kind(TokenKind.IDENTIFIER, "parameter name")
            if name_tok.text in seen:
                raise self._error(f"duplicate parameter {name_tok.text!r}", name_tok)
            seen.add(name_tok.text)
            annotation = default = None
            end_ti = name_tok.span.token_index
            if (tok := self._peek()) is not None and tok.is_op(":"):
                self._next()
                annotation = _mark_annotation(self._parse_expr())
                end_ti = annotation.end_ti
            if (tok := self._peek()) is not None and tok.is_op("="):
                self._next()
                default = self._parse_expr()
                end_ti = default.end_ti
            params.append(
                Param(span=name_tok.span, end_ti=end_ti, name=name_tok.text,
                      annotation=annotation, default=default)
            )
            tok = self._peek()
            if tok is not None and tok.is_op(","):
                self._next()
            elif tok is None or not tok.is_op(")"):
                raise self._error("expected ',' or ')' in parameter list")

    def _parse_class_stub(self) -> ClassStub:
        class_tok = self._next()
        name_tok = self._expect_kind(TokenKind.IDENTIFIER, "class name")
        if (tok := self._peek()) is not None and tok.is_op("("):
            raise self._unsupported("class bases are not supported in stubs", tok)
        self._expect_op(":")
        fields: list[AnnField] = []
        methods: list[FunctionDef] = []
        tok = self._peek()
        if tok is not None and tok.kind is not TokenKind.NEWLINE:
            # one-liner: class Foo: ...
            self._expect_op("...")
            end_ti = self.pos - 1
            self._expect_newline()
            return ClassStub(span=class_tok.span, end_ti=end_ti, name=name_tok.text,
                             fields=(), methods=())
        self._expect_newline()
        self._expect_kind(TokenKind.INDENT, "indented class body")
        while (tok := self._peek()) is not None and tok.kind is not TokenKind.DEDENT:
            if tok.kind is TokenKind.NEWLINE:
                self.pos += 1
                continue
            if tok.is_kw("def"):
                method = self._parse_funcdef()
                if not method.is_stub:
                    raise self._unsupported("stub method body must be '...'", self.toks[method.span.token_index])
                methods.append(method)
                continue
            if tok.is_kw("pass") or tok.is_op("..."):
                self._next()
                self._expect_newline()
                continue
            name = self._expect_kind(TokenKind.IDENTIFIER, "attribute name")
            self._expect_op(":")
            ann = _mark_annotation(self._parse_expr())
            self._expect_newline()
            fields.append(AnnField(span=name.span, end_ti=ann.end_ti, name=name.text, annotation=ann))
        end_ti = self.pos
        self._expect_kind(TokenKind.DEDENT, "end of class body")
        return ClassStub(span=class_tok.span, end_ti=end_ti, name=name_tok.text,
                         fields=tuple(fields), methods=tuple(methods))

    # -- statements ----------------------------------------------------------------

    def _parse_block(self) -> tuple[Stmt, ...]:
        tok = self._peek()
        if tok is not None and tok.kind is not TokenKind.NEWLINE:
            return tuple(self._parse_simple_line())
        self._expect_newline()
        self._skip_newlines()
        self._expect_kind(TokenKind.INDENT, "indented block")
        stmts: list[Stmt] = []
        while (tok := self._peek()) is not None and tok.kind is not TokenKind.DEDENT:
            if tok.kind is TokenKind.NEWLINE:
                self.pos += 1
                continue
            stmts.extend(self._parse_statement())
        self._expect_kind(TokenKind.DEDENT, "end of block")
        if not stmts:
            raise self._error("empty block")
        return tuple(stmts)

    def _parse_statement(self) -> list[Stmt]:
        tok = self._peek()
        assert tok is not None
        if tok.kind is TokenKind.KEYWORD:
            if tok.text in ("if",):
                return [self._parse_if()]
            if tok.text == "for":
                return [self._parse_for()]
            if tok.text == "while":
                return [self._parse_while()]
            if tok.text in _UNSUPPORTED_STMT_KEYWORDS and tok.text != "lambda":
                raise self._unsupported(f"'{tok.text}' statements are not supported", tok)
            if tok.text == "def":
                raise self._unsupported("nested function definitions are not supported", tok)
            if tok.text == "class":
                raise self._unsupported("class definitions inside functions are not supported", tok)
            if tok.text in ("import", "from"):
                raise self._unsupported("imports are only allowed at module level", tok)
            if tok.text in ("elif", "else"):
                raise self._error(f"'{tok.text}' without matching 'if'", tok)
        if tok.is_op("@"):
            raise self._unsupported("decorators are not supported", tok)
        return self._parse_simple_line()

    def _parse_simple_line(self) -> list[Stmt]:
        stmts = [self._parse_small_stmt()]
        while (tok := self._peek()) is not None and tok.is_op(";"):
            self._next()
            nxt = self._peek()
            if nxt is None or nxt.kind is TokenKind.NEWLINE:
                break
            stmts.append(self._parse_small_stmt())
        self._expect_newline()
        return stmts

    def _parse_small_stmt(self) -> Stmt:
        tok = self._peek()
        assert tok is not None
        if tok.is_kw("return"):
            self._next()
            value = None
            nxt = self._peek()
            if nxt is not None and nxt.kind is not TokenKind.NEWLINE and not nxt.is_op(";"):
                value = self._parse_testlist()
            end_ti = value.end_ti if value is not None else tok.span.token_index
            return Return(span=tok.span, end_ti=end_ti, value=value)
        if tok.is_kw("yield"):
            value = self._parse_yield()
            return ExprStmt(span=value.span, end_ti=value.end_ti, value=value)
        if tok.is_kw("del"):
            self._next()
            targets: list[Expr] = [self._parse_expr()]
            while (nxt := self._peek()) is not None and nxt.is_op(","):
                self._next()
                targets.append(self._parse_expr())
            targets = [_to_target(t, Usage.DELETE) for t in targets]
            return Delete(span=tok.span, end_ti=targets[-1].end_ti, targets=tuple(targets))
        if tok.is_kw("pass"):
            self._next()
            return Pass(span=tok.span, end_ti=tok.span.token_index)
        if tok.is_kw("break"):
            self._next()
            return Break(span=tok.span, end_ti=tok.span.token_index)
        if tok.is_kw("continue"):
            self._next()
            return Continue(span=tok.span, end_ti=tok.span.token_index)
        return self._parse_expr_like_stmt()

    def _parse_expr_like_stmt(self) -> Stmt:
        first = self._parse_testlist()
        tok = self._peek()
        if tok is not None and tok.is_op(":"):
            # annotated declaration / assignment
            self._next()
            annotation = _mark_annotation(self._parse_expr())
            value = None
            if (nxt := self._peek()) is not None and nxt.is_op("="):
                self._next()
                value = self._parse_expr_or_yield()
            target = _to_target(first, Usage.STORE)
            if not isinstance(target, (Name, Attribute, Subscript)):
                raise self._error("invalid annotated assignment target", self.toks[first.span.token_index])
            end = value.end_ti if value is not None else annotation.end_ti
            return AnnAssign(span=first.span, end_ti=end, target=target, annotation=annotation, value=value)
        if tok is not None and tok.kind is TokenKind.OPERATOR and tok.text in AUG_OPS:
            self._next()
            value = self._parse_expr_or_yield()
            target = _to_target(first, Usage.STORE)
            if not isinstance(target, (Name, Attribute, Subscript)):
                raise self._error("invalid augmented assignment target", self.toks[first.span.token_index])
            return AugAssign(span=first.span, end_ti=value.end_ti, target=target,
                             op=tok.text[:-1], value=value)
        if tok is not None and tok.is_op("="):
            targets = [first]
            value: Expr | None = None
            while (tok := self._peek()) is not None and tok.is_op("="):
                self._next()
                nxt = self._parse_testlist_or_yield()
                targets.append(nxt)
            value = targets.pop()
            targets = [_to_target(t, Usage.STORE) for t in targets]
            return Assign(span=first.span, end_ti=value.end_ti, targets=tuple(targets), value=value)
        return ExprStmt(span=first.span, end_ti=first.end_ti, value=first)

    def _parse_if(self) -> If:
        if_tok = self._next()
        cond = self._parse_expr()
        self._expect_op(":")
        body = self._parse_block()
        orelse: tuple[Stmt, ...] = ()
        self._skip_newlines_before_branch()
        tok = self._peek()
        if tok is not None and tok.is_kw("elif"):
            nested = self._parse_if_from_elif()
            orelse = (nested,)
        elif tok is not None and tok.is_kw("else"):
            self._next()
            self._expect_op(":")
            orelse = self._parse_block()
        end_ti = orelse[-1].end_ti if orelse else body[-1].end_ti
        return If(span=if_tok.span, end_ti=end_ti, cond=cond, body=body, orelse=orelse)

    def _parse_if_from_elif(self) -> If:
        elif_tok = self._next()
        cond = self._parse_expr()
        self._expect_op(":")
        body = self._parse_block()
        orelse: tuple[Stmt, ...] = ()
        self._skip_newlines_before_branch()
        tok = self._peek()
        if tok is not None and tok.is_kw("elif"):
            orelse = (self._parse_if_from_elif(),)
        elif tok is not None and tok.is_kw("else"):
            self._next()
            self._expect_op(":")
            orelse = self._parse_block()
        end_ti = orelse[-1].end_ti if orelse else body[-1].end_ti
        return If(span=elif_tok.span, end_ti=end_ti, cond=cond, body=body, orelse=orelse)

    def _skip_newlines_before_branch(self) -> None:
        # blank lines between a block and its elif/else are token-level newlines
        save = self.pos
        self._skip_newlines()
        tok = self._peek()
        if tok is None or not tok.is_kw("elif", "else"):
            self.pos = save

    def _parse_for(self) -> For:
        for_tok = self._next()
        target = self._parse_testlist(stop_keywords=("in",))
        tok = self._peek()
        if tok is None or not tok.is_kw("in"):
            raise self._error("expected 'in'")
        self._next()
        iterable = self._parse_testlist()
        self._expect_op(":")
        body = self._parse_block()
        self._reject_loop_else()
        return For(span=for_tok.span, end_ti=body[-1].end_ti,
                   target=_to_target(target, Usage.STORE), iter=iterable, body=body)

    def _parse_while(self) -> While:
        while_tok = self._next()
        cond = self._parse_expr()
        self._expect_op(":")
        body = self._parse_block()
        self._reject_loop_else()
        return While(span=while_tok.span, end_ti=body[-1].end_ti, cond=cond, body=body)

    def _reject_loop_else(self) -> None:
        save = self.pos
        self._skip_newlines()
        tok = self._peek()
        if tok is not None and tok.is_kw("else"):
            raise self._unsupported("loop 'else' clauses are not supported", tok)
        self.pos = save

    # -- expressions ------------------------------------------------------------

    def _parse_testlist(self, stop_keywords: tuple[str, ...] = ()) -> Expr:
        """Expression or bare comma tuple (a, b)."""
        first = self._parse_expr(stop_keywords=stop_keywords)
        tok = self._peek()
        if tok is None or not tok.is_op(","):
            return first
        elts = [first]
        while (tok := self._peek()) is not None and tok.is_op(","):
            self._next()
            nxt = self._peek()
            if nxt is None or nxt.kind is TokenKind.NEWLINE or nxt.is_op(")", "]", "}", ":", ";", "="):
                break
            if stop_keywords and nxt.is_kw(*stop_keywords):
                break
            elts.append(self._parse_expr(stop_keywords=stop_keywords))
        return TupleLit(span=first.span, end_ti=elts[-1].end_ti, elts=tuple(elts))

    def _parse_testlist_or_yield(self) -> Expr:
        tok = self._peek()
        if tok is not None and tok.is_kw("yield"):
            return self._parse_yield()
        return self._parse_testlist()

    def _parse_expr_or_yield(self) -> Expr:
        tok = self._peek()
        if tok is not None and tok.is_kw("yield"):
            return self._parse_yield()
        return self._parse_testlist()

    def _parse_yield(self) -> YieldExpr:
        yield_tok = self._next()
        tok = self._peek()
        value: Expr | None = None
        if tok is not None and tok.kind is not TokenKind.NEWLINE and not tok.is_op(")", "]", "}", ",", ";", ":"):
            value = self._parse_testlist()
        end_ti = value.end_ti if value is not None else yield_tok.span.token_index
        return YieldExpr(span=yield_tok.span, end_ti=end_ti, value=value)

    def _parse_expr(self, stop_keywords: tuple[str, ...] = ()) -> Expr:
        expr = self._parse_or(stop_keywords)
        tok = self._peek()
        if tok is not None and tok.is_kw("if"):
            raise self._unsupported("conditional expressions are not supported", tok)
        if tok is not None and tok.is_op(":="):
            raise self._unsupported("assignment expressions are not supported", tok)
        return expr

    def _parse_or(self, stop: tuple[str, ...] = ()) -> Expr:
        left = self._parse_and(stop)
        values = [left]
        while (tok := self._peek()) is not None and tok.is_kw("or"):
            self._next()
            values.append(self._parse_and(stop))
        if len(values) == 1:
            return left
        return BoolOp(span=left.span, end_ti=values[-1].end_ti, op="or", values=tuple(values))

    def _parse_and(self, stop: tuple[str, ...] = ()) -> Expr:
        left = self._parse_not(stop)
        values = [left]
        while (tok := self._peek()) is not None and tok.is_kw("and"):
            self._next()
            values.append(self._parse_not(stop))
        if len(values) == 1:
            return left
        return BoolOp(span=left.span, end_ti=values[-1].end_ti, op="and", values=tuple(values))

    def _parse_not(self, stop: tuple[str, ...] = ()) -> Expr:
        tok = self._peek()
        if tok is not None and tok.is_kw("not"):
            self._next()
            operand = self._parse_not(stop)
            return UnaryOp(span=tok.span, end_ti=operand.end_ti, op="not", operand=operand)
        return self._parse_comparison(stop)

    def _parse_comparison(self, stop: tuple[str, ...] = ()) -> Expr:
        left = self._parse_bitor()
        ops: list[str] = []
        comparators: list[Expr] = []
        while True:
            tok = self._peek()
            if tok is None:
                break
            op: str | None = None
            if tok.kind is TokenKind.OPERATOR and tok.text in ("<", ">", "<=", ">=", "==", "!="):
                self._next()
                op = tok.text
            elif tok.is_kw("in") and "in" not in stop:
                self._next()
                op = "in"
            elif tok.is_kw("not"):
                nxt = self._peek(1)
                if nxt is not None and nxt.is_kw("in") and "in" not in stop:
                    self._next()
                    self._next()
                    op = "not in"
                else:
                    break
            elif tok.is_kw("is"):
                self._next()
                nxt = self._peek()
                if nxt is not None and nxt.is_kw("not"):
                    self._next()
                    op = "is not"
                else:
                    op = "is"
            else:
                break
            ops.append(op)
            comparators.append(self._parse_bitor())
        if not ops:
            return left
        return Compare(span=left.span, end_ti=comparators[-1].end_ti,
                       left=left, ops=tuple(ops), comparators=tuple(comparators))

    def _binop_level(self, operators: tuple[str, ...], next_level) -> Expr:
        left = next_level()
        while (tok := self._peek()) is not None and tok.kind is TokenKind.OPERATOR and tok.text in operators:
            self._next()
            right = next_level()
            left = BinOp(span=left.span, end_ti=right.end_ti, left=left, op=tok.text, right=right)
        return left

    def _parse_bitor(self) -> Expr:
        return self._binop_level(("|",), self._parse_bitxor)

    def _parse_bitxor(self) -> Expr:
        return self._binop_level(("^",), self._parse_bitand)

    def _parse_bitand(self) -> Expr:
        return self._binop_level(("&",), self._parse_shift)

    def _parse_shift(self) -> Expr:
        return self._binop_level(("<<", ">>"), self._parse_arith)

    def _parse_arith(self) -> Expr:
        return self._binop_level(("+", "-"), self._parse_term)

    def _parse_term(self) -> Expr:
        return self._binop_level(("*", "/", "//", "%", "@"), self._parse_factor)

    def _parse_factor(self) -> Expr:
        tok = self._peek()
        if tok is not None and tok.kind is TokenKind.OPERATOR and tok.text in ("+", "-", "~"):
            self._next()
            operand = self._parse_factor()
            return UnaryOp(span=tok.span, end_ti=operand.end_ti, op=tok.text, operand=operand)
        return self._parse_power()

    def _parse_power(self) -> Expr:
        base = self._parse_postfix()
        tok = self._peek()
        if tok is not None and tok.kind is TokenKind.OPERATOR and tok.text == "**":
            self._next()
            exponent = self._parse_factor()  # right associative
            return BinOp(span=base.span, end_ti=exponent.end_ti, left=base, op="**", right=exponent)
        return base

    def _parse_postfix(self) -> Expr:
        expr = self._parse_atom()
        while (tok := self._peek()) is not None:
            if tok.is_op("."):
                self._next()
                attr = self._expect_kind(TokenKind.IDENTIFIER, "attribute name")
                expr = Attribute(span=expr.span, end_ti=attr.span.token_index,
                                 value=expr, attr=attr.text, attr_span=attr.span)
            elif tok.is_op("("):
                expr = self._parse_call(expr)
            elif tok.is_op("["):
                self._next()
                index = self._parse_subscript_index()
                close = self._expect_op("]")
                expr = Subscript(span=expr.span, end_ti=close.span.token_index, value=expr, index=index)
            else:
                break
        return expr

    def _parse_call(self, func: Expr) -> Call:
        self._next()  # '('
        args: list[Expr] = []
        kwargs: list[tuple[str, Expr]] = []
        while True:
            tok = self._peek()
            if tok is None:
                raise self._error("unterminated call")
            if tok.is_op(")"):
                close = self._next()
                return Call(span=func.span, end_ti=close.span.token_index,
                            func=func, args=tuple(args), kwargs=tuple(kwargs))
            if tok.is_op("*", "**"):
                raise self._unsupported("star arguments are not supported", tok)
            if tok.is_kw("for"):
                raise self._unsupported("comprehensions are not supported", tok)
            nxt = self._peek(1)
            if tok.kind is TokenKind.IDENTIFIER and nxt is not None and nxt.is_op("="):
                self._next()
                self._next()
                kwargs.append((tok.text, self._parse_expr()))
            else:
                if kwargs:
                    raise self._error("positional argument after keyword argument", tok)
                arg = self._parse_expr()
                if (after := self._peek()) is not None and after.is_kw("for"):
                    raise self._unsupported("comprehensions are not supported", after)
                args.append(arg)
            tok = self._peek()
            if tok is not None and tok.is_op(","):
                self._next()
            elif tok is None or not tok.is_op(")"):
                raise self._error("expected ',' or ')' in call")

    def _parse_subscript_index(self) -> Expr:
        start = self._peek()
        if start is None:
            raise self._error("unterminated subscript")

        def slice_part(terminators: tuple[str, ...]) -> Expr | None:
            tok = self._peek()
            if tok is not None and tok.is_op(*terminators):
                return None
            return self._parse_expr()

        lower = slice_part((":", "]"))
        tok = self._peek()
        if tok is not None and tok.is_op(":"):
            colon = self._next()
            upper = slice_part((":", "]"))
            step: Expr | None = None
            tok = self._peek()
            if tok is not None and tok.is_op(":"):
                self._next()
                step = slice_part(("]",))
            anchor = lower if lower is not None else None
            span = anchor.span if anchor is not None else colon.span
            last = step or upper or lower
            end_ti = last.end_ti if last is not None else colon.span.token_index
            return SliceExpr(span=span, end_ti=end_ti, lower=lower, upper=upper, step=step)
        if lower is None:
            raise self._error("empty subscript")
        if tok is not None and tok.is_op(","):
            elts = [lower]
            while (tok := self._peek()) is not None and tok.is_op(","):
                self._next()
                if (nxt := self._peek()) is not None and nxt.is_op("]"):
                    break
                elts.append(self._parse_expr())
            return TupleLit(span=lower.span, end_ti=elts[-1].end_ti, elts=tuple(elts))
        return lower

    def _parse_atom(self) -> Expr:
        tok = self._peek()
        if tok is None:
            raise self._error("expected expression")
        if tok.kind is TokenKind.IDENTIFIER:
            self._next()
            return Name(span=tok.span, end_ti=tok.span.token_index, id=tok.text)
        if tok.kind is TokenKind.NUMBER:
            self._next()
            return NumberLit(span=tok.span, end_ti=tok.span.token_index,
                             text=tok.text, numeric_kind=_numeric_kind(tok.text))
        if tok.kind is TokenKind.STRING:
            parts = [self._next()]
            while (nxt := self._peek()) is not None and nxt.kind is TokenKind.STRING:
                parts.append(self._next())
            prefix = _string_prefix(parts[0].text)
            return StringLit(
                span=parts[0].span,
                end_ti=parts[-1].span.token_index,
                text="".join(p.text for p in parts),
                is_bytes="b" in prefix,
                is_fstring="f" in prefix,
            )
        if tok.is_kw("True", "False"):
            self._next()
            return BoolLit(span=tok.span, end_ti=tok.span.token_index, value=tok.text == "True")
        if tok.is_kw("None"):
            self._next()
            return NoneLit(span=tok.span, end_ti=tok.span.token_index)
        if tok.is_op("..."):
            self._next()
            return EllipsisLit(span=tok.span, end_ti=tok.span.token_index)
        if tok.is_kw("lambda"):
            return self._parse_lambda()
        if tok.is_kw("await", "async"):
            raise self._unsupported(f"'{tok.text}' expressions are not supported", tok)
        if tok.is_op(":="):
            raise self._unsupported("assignment expressions are not supported", tok)
        if tok.is_op("("):
            return self._parse_paren()
        if tok.is_op("["):
            return self._parse_list_display()
        if tok.is_op("{"):
            return self._parse_dict_or_set()
        raise self._error(f"unexpected token {tok.text!r}", tok)

    def _parse_lambda(self) -> LambdaExpr:
        lam = self._next()
        # parameters: names with optional defaults, then ':'
        while True:
            tok = self._peek()
            if tok is None:
                raise self._error("unterminated lambda")
            if tok.is_op(":"):
                self._next()
                break
            if tok.is_op("*", "**"):
                raise self._unsupported("star parameters are not supported", tok)
            self._expect_kind(TokenKind.IDENTIFIER, "lambda parameter")
            tok = self._peek()
            if tok is not None and tok.is_op("="):
                self._next()
                self._parse_expr()
                tok = self._peek()
            if tok is not None and tok.is_op(","):
                self._next()
        body = self._parse_expr()  # parsed for well-formedness, then discarded
        return LambdaExpr(span=lam.span, end_ti=body.end_ti)

    def _parse_paren(self) -> Expr:
        open_tok = self._next()
        tok = self._peek()
        if tok is not None and tok.is_op(")"):
            close = self._next()
            return TupleLit(span=open_tok.span, end_ti=close.span.token_index, elts=())
        if tok is not None and tok.is_kw("yield"):
            inner = self._parse_yield()
            close = self._expect_op(")")
            return replace(inner, span=inner.span, end_ti=close.span.token_index)
        first = self._parse_expr()
        tok = self._peek()
        if tok is not None and tok.is_kw("for"):
            raise self._unsupported("comprehensions are not supported", tok)
        if tok is not None and tok.is_op(","):
            elts = [first]
            while (tok := self._peek()) is not None and tok.is_op(","):
                self._next()
                if (nxt := self._peek()) is not None and nxt.is_op(")"):
                    break
                elts.append(self._parse_expr())
            close = self._expect_op(")")
            return TupleLit(span=open_tok.span, end_ti=close.span.token_index, elts=tuple(elts))
        close = self._expect_op(")")
        # parenthesized expression keeps its inner node, widened to the ')'
        return replace(first, end_ti=close.span.token_index)

    def _parse_list_display(self) -> Expr:
        open_tok = self._next()
        elts: list[Expr] = []
        while True:
            tok = self._peek()
            if tok is None:
                raise self._error("unterminated list display")
            if tok.is_op("]"):
                close = self._next()
                return ListLit(span=open_tok.span, end_ti=close.span.token_index, elts=tuple(elts))
            if tok.is_kw("for"):
                raise self._unsupported("comprehensions are not supported", tok)
            elts.append(self._parse_expr())
            tok = self._peek()
            if tok is not None and tok.is_kw("for"):
                raise self._unsupported("comprehensions are not supported", tok)
            if tok is not None and tok.is_op(","):
                self._next()
            elif tok is None or not tok.is_op("]"):
                raise self._error("expected ',' or ']' in list")

    def _parse_dict_or_set(self) -> Expr:
        open_tok = self._next()
        tok = self._peek()
        if tok is not None and tok.is_op("}"):
            close = self._next()
            return DictLit(span=open_tok.span, end_ti=close.span.token_index, items=())
        if tok is not None and tok.is_op("**"):
            raise self._unsupported("dict unpacking is not supported", tok)
        first = self._parse_expr()
        tok = self._peek()
        if tok is not None and tok.is_kw("for"):
            raise self._unsupported("comprehensions are not supported", tok)
        if tok is not None and tok.is_op(":"):
            self._next()
            items = [(first, self._parse_expr())]
            while (tok := self._peek()) is not None and tok.is_op(","):
                self._next()
                if (nxt := self._peek()) is not None and nxt.is_op("}"):
                    break
                key = self._parse_expr()
                self._expect_op(":")
                items.append((key, self._parse_expr()))
            close = self._expect_op("}")
            return DictLit(span=open_tok.span, end_ti=close.span.token_index, items=tuple(items))
        elts = [first]
        while (tok := self._peek()) is not None and tok.is_op(","):
            self._next()
            if (nxt := self._peek()) is not None and nxt.is_op("}"):
                break
            elts.append(self._parse_expr())
            if (after := self._peek()) is not None and after.is_kw("for"):
                raise self._unsupported("comprehensions are not supported", after)
        close = self._expect_op("}")
        return SetLit(span=open_tok.span, end_ti=close.span.token_index, elts=tuple(elts))


def _numeric_kind(text: str) -> str:
    lowered = text.lower()
    if lowered.endswith("j"):
        return "complex"
    if lowered.startswith(("0x", "0o", "0b")):
        return "int"
    if "." in text or (("e" in lowered) and not lowered.startswith("0x")):
        return "float"
    return "int"


def _string_prefix(text: str) -> str:
    i = 0
    while i < len(text) and text[i] not in "'\"":
        i += 1
    return text[:i].lower()


def _to_target(expr: Expr, usage: Usage) -> Expr:
    if isinstance(expr, Name):
        return replace(expr, ctx=usage)
    if isinstance(expr, Attribute):
        return replace(expr, ctx=usage)
    if isinstance(expr, Subscript):
        return replace(expr, ctx=usage)
    if isinstance(expr, TupleLit):
        return replace(expr, elts=tuple(_to_target(e, usage) for e in expr.elts))
    if isinstance(expr, ListLit):
        return replace(expr, elts=tuple(_to_target(e, usage) for e in expr.elts))
    raise ParseError("invalid assignment target", expr.span.line, expr.span.column)


def _mark_annotation(expr: Expr) -> Expr:
    """Names inside annotations are annotation usages, not loads."""
    if isinstance(expr, Name):
        return replace(expr, ctx=Usage.ANNOTATION)
    if isinstance(expr, Attribute):
        return replace(expr, value=_mark_annotation(expr.value))
    if isinstance(expr, Subscript):
        return replace(expr, value=_mark_annotation(expr.value), index=_mark_annotation(expr.index))
    if isinstance(expr, TupleLit):
        return replace(expr, elts=tuple(_mark_annotation(e) for e in expr.elts))
    if isinstance(expr, ListLit):
        return replace(expr, elts=tuple(_mark_annotation(e) for e in expr.elts))
    if isinstance(expr, SliceExpr):
        return replace(
            expr,
            lower=_mark_annotation(expr.lower) if expr.lower else None,
            upper=_mark_annotation(expr.upper) if expr.upper else None,
            step=_mark_annotation(expr.step) if expr.step else None,
        )
    if isinstance(expr, BinOp):
        return replace(expr, left=_mark_annotation(expr.left), right=_mark_annotation(expr.right))
    return expr


def parse_function(tokens: list[Token]) -> SyntaxTree:
    """Parse one sample: optional imports/stubs, then a single function def."""
    parser = _Parser(tokens)
    preamble, function = parser.parse_sample()
    return SyntaxTree(preamble=preamble, function=function, tokens=tuple(tokens))


def parse_stub_declarations(tokens: list[Token]) -> list[Stmt]:
    """Parse companion stub source: imports plus def/class stubs only."""
    return _Parser(tokens).parse_stub_items()
