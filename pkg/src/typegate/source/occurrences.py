"""Identifier occurrences of a parsed function, in source order.

Attribute selectors and keyword-argument names are not occurrences; lambda
interiors are opaque; names inside annotations classify as annotation usage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from typegate.source.tokens import SourceSpan
from typegate.source import syntax as syn
from typegate.source.syntax import Usage


@dataclass(frozen=True)
class IdentifierOccurrence:
    name: str
    span: SourceSpan
    usage: Usage


def walk_expr(expr: syn.Expr) -> Iterator[syn.Expr]:
    """Depth-first pre-order over an expression; stops at opaque lambdas."""
    yield expr
    if isinstance(expr, syn.LambdaExpr):
        return
    if isinstance(expr, (syn.TupleLit, syn.ListLit, syn.SetLit)):
        for e in expr.elts:
            yield from walk_expr(e)
    elif isinstance(expr, syn.DictLit):
        for k, v in expr.items:
            yield from walk_expr(k)
            yield from walk_expr(v)
    elif isinstance(expr, syn.Attribute):
        yield from walk_expr(expr.value)
    elif isinstance(expr, syn.Subscript):
        yield from walk_expr(expr.value)
        yield from walk_expr(expr.index)
    elif isinstance(expr, syn.SliceExpr):
        for part in (expr.lower, expr.upper, expr.step):
            if part is not None:
                yield from walk_expr(part)
    elif isinstance(expr, syn.Call):
        yield from walk_expr(expr.func)
        for a in expr.args:
            yield from walk_expr(a)
        for _, v in expr.kwargs:
            yield from walk_expr(v)
    elif isinstance(expr, syn.BinOp):
        yield from walk_expr(expr.left)
        yield from walk_expr(expr.right)
    elif isinstance(expr, syn.UnaryOp):
        yield from walk_expr(expr.operand)
    elif isinstance(expr, syn.BoolOp):
        for v in expr.values:
            yield from walk_expr(v)
    elif isinstance(expr, syn.Compare):
        yield from walk_expr(expr.left)
        for c in expr.comparators:
            yield from walk_expr(c)
    elif isinstance(expr, syn.YieldExpr):
        if expr.value is not None:
            yield from walk_expr(expr.value)


def statement_exprs(stmt: syn.Stmt) -> Iterator[syn.Expr]:
    """Top-level expressions of one statement (not descending into blocks)."""
    if isinstance(stmt, syn.Assign):
        yield stmt.value
        yield from stmt.targets
    elif isinstance(stmt, syn.AugAssign):
        yield stmt.target
        yield stmt.value
    elif isinstance(stmt, syn.AnnAssign):
        yield stmt.target
        yield stmt.annotation
        if stmt.value is not None:
            yield stmt.value
    elif isinstance(stmt, syn.ExprStmt):
        yield stmt.value
    elif isinstance(stmt, syn.Return):
        if stmt.value is not None:
            yield stmt.value
    elif isinstance(stmt, syn.Delete):
        yield from stmt.targets
    elif isinstance(stmt, syn.If):
        yield stmt.cond
    elif isinstance(stmt, syn.For):
        yield stmt.target
        yield stmt.iter
    elif isinstance(stmt, syn.While):
        yield stmt.cond


def walk_statements(body: tuple[syn.Stmt, ...]) -> Iterator[syn.Stmt]:
    for stmt in body:
        yield stmt
        if isinstance(stmt, syn.If):
            yield from walk_statements(stmt.body)
            yield from walk_statements(stmt.orelse)
        elif isinstance(stmt, (syn.For, syn.While)):
            yield from walk_statements(stmt.body)


def identifier_occurrences(tree: syn.SyntaxTree) -> list[IdentifierOccurrence]:
    """All identifier occurrences of the analyzed function, in source order."""
    found: list[IdentifierOccurrence] = []

    def add_expr(expr: syn.Expr) -> None:
        for node in walk_expr(expr):
            if isinstance(node, syn.Name):
                found.append(IdentifierOccurrence(node.id, node.span, node.ctx))

    fn = tree.function
    for param in fn.params:
        found.append(IdentifierOccurrence(param.name, param.span, Usage.PARAM))
        if param.annotation is not None:
            add_expr(param.annotation)
        if param.default is not None:
            add_expr(param.default)
    if fn.returns is not None:
        add_expr(fn.returns)
    for stmt in walk_statements(fn.body):
        for expr in statement_exprs(stmt):
            add_expr(expr)
    found.sort(key=lambda occ: occ.span.token_index)
    return found
