"""Companion stub declarations: ambient function/class signatures.

Stub source uses the analyzed language's surface syntax with bodies replaced
by "...". Stub annotations are always consumed; they are declarations, not
annotations of the analyzed function.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from typegate.errors import StubError
from typegate.source import parse_stub_declarations, tokenize
from typegate.source import syntax as syn
from typegate.typecheck.types import (
    BOOL, BYTES, FLOAT, INT, NONE, STR, UNKNOWN,
    ClassT, DictT, FunctionT, ListT, SetT, TupleT, TypeTerm, union_of,
)

_PRIMITIVES: dict[str, TypeTerm] = {
    "bool": BOOL,
    "int": INT,
    "float": FLOAT,
    "str": STR,
    "bytes": BYTES,
    "None": NONE,
    "object": UNKNOWN,
    "Any": UNKNOWN,
}


def resolve_annotation(expr: syn.Expr | None, class_names: dict[str, ClassT]) -> TypeTerm:
    """Annotation expression -> type term; anything unresolvable is Unknown."""
    if expr is None:
        return UNKNOWN
    if isinstance(expr, syn.NoneLit):
        return NONE
    if isinstance(expr, syn.Name):
        if expr.id in _PRIMITIVES:
            return _PRIMITIVES[expr.id]
        if expr.id in class_names:
            return class_names[expr.id]
        if expr.id == "list":
            return ListT(UNKNOWN)
        if expr.id == "set":
            return SetT(UNKNOWN)
        if expr.id == "dict":
            return DictT(UNKNOWN, UNKNOWN)
        if expr.id == "tuple":
            return TupleT(None)
        return UNKNOWN
    if isinstance(expr, syn.StringLit):
        return UNKNOWN  # quoted forward references stay opaque
    if isinstance(expr, syn.BinOp) and expr.op == "|":
        return union_of(
            resolve_annotation(expr.left, class_names),
            resolve_annotation(expr.right, class_names),
        )
    if isinstance(expr, syn.Subscript) and isinstance(expr.value, syn.Name):
        head = expr.value.id
        args: tuple[syn.Expr, ...]
        if isinstance(expr.index, syn.TupleLit):
            args = expr.index.elts
        else:
            args = (expr.index,)
        resolved = tuple(resolve_annotation(a, class_names) for a in args)
        if head == "list" and len(resolved) == 1:
            return ListT(resolved[0])
        if head == "set" and len(resolved) == 1:
            return SetT(resolved[0])
        if head == "dict" and len(resolved) == 2:
            return DictT(resolved[0], resolved[1])
        if head == "tuple":
            return TupleT(resolved)
        return UNKNOWN
    return UNKNOWN


@dataclass(frozen=True)
class StubSet:
    """Ambient bindings introduced before the function is analyzed."""

    bindings: tuple[tuple[str, TypeTerm], ...] = ()
    class_names: tuple[str, ...] = field(default=())

    def as_dict(self) -> dict[str, TypeTerm]:
        return dict(self.bindings)

    @staticmethod
    def empty() -> "StubSet":
        return StubSet()


def _function_type(fn: syn.FunctionDef, classes: dict[str, ClassT], drop_self: bool = False) -> FunctionT:
    params = list(fn.params)
    if drop_self and params and params[0].name == "self":
        params = params[1:]
    param_types = tuple(resolve_annotation(p.annotation, classes) for p in params)
    ret = resolve_annotation(fn.returns, classes)
    return FunctionT(param_types, ret)


def parse_stub_set(source: str) -> StubSet:
    """Parse companion stub text into ambient bindings.

    Raises StubError on duplicate names or malformed declarations.
    """
    try:
        items = parse_stub_declarations(tokenize(source))
    except StubError:
        raise
    except Exception as exc:
        raise StubError(f"malformed stub source: {exc}") from exc
    return stub_set_from_items(items)


def stub_set_from_items(items: list[syn.Stmt]) -> StubSet:
    """Ambient bindings from already-parsed stub declarations."""
    class_stubs = [it for it in items if isinstance(it, syn.ClassStub)]
    classes: dict[str, ClassT] = {}
    for stub in class_stubs:
        if stub.name in classes:
            raise StubError(f"duplicate stub class {stub.name!r}")
        classes[stub.name] = ClassT(stub.name)  # placeholder for mutual references

    # resolve attribute tables with all class names visible
    for stub in class_stubs:
        attrs: list[tuple[str, TypeTerm]] = []
        seen: set[str] = set()
        for fld in stub.fields:
            if fld.name in seen:
                raise StubError(f"duplicate attribute {stub.name}.{fld.name}")
            seen.add(fld.name)
            attrs.append((fld.name, resolve_annotation(fld.annotation, classes)))
        for method in stub.methods:
            if method.name in seen:
                raise StubError(f"duplicate attribute {stub.name}.{method.name}")
            seen.add(method.name)
            attrs.append((method.name, _function_type(method, classes, drop_self=True)))
        classes[stub.name] = ClassT(stub.name, tuple(attrs))

    bindings: dict[str, TypeTerm] = {}
    for item in items:
        if isinstance(item, syn.ImportStmt):
            for name in item.bound_names:
                bindings.setdefault(name, UNKNOWN)
        elif isinstance(item, syn.FunctionDef):
            if item.name in bindings:
                raise StubError(f"duplicate stub name {item.name!r}")
            bindings[item.name] = _function_type(item, classes)
        elif isinstance(item, syn.ClassStub):
            if item.name in bindings:
                raise StubError(f"duplicate stub name {item.name!r}")
            # the class name is callable and constructs an instance
            bindings[item.name] = FunctionT(None, classes[item.name])
    return StubSet(bindings=tuple(sorted(bindings.items(), key=lambda kv: kv[0])),
                   class_names=tuple(sorted(classes)))


def merge_stub_sets(primary: StubSet | None, secondary: StubSet | None) -> StubSet:
    merged: dict[str, TypeTerm] = {}
    names: list[str] = []
    for stub_set in (primary, secondary):
        if stub_set is None:
            continue
        merged.update(stub_set.as_dict())
        names.extend(stub_set.class_names)
    return StubSet(bindings=tuple(sorted(merged.items(), key=lambda kv: kv[0])),
                   class_names=tuple(sorted(set(names))))
