"""Flow-aware scope analysis and type inference with the closed taxonomy."""

from typegate.typecheck.engine import (
    Category,
    CheckConfig,
    Definedness,
    Diagnostic,
    ScopeModel,
    build_scopes,
    check,
    collect_local_names,
    expr_type,
)
from typegate.typecheck.stubs import StubSet, merge_stub_sets, parse_stub_set, resolve_annotation
from typegate.typecheck.types import (
    BOOL, BYTES, FLOAT, INT, NONE, STR, UNKNOWN,
    ClassT, DictT, FunctionT, ListT, SetT, TupleT, TypeTerm, UnionT,
    compatible, definitely_incompatible, union_of,
)

DETECTION_CATEGORIES = frozenset(
    {
        Category.NAME_ERROR,
        Category.ATTRIBUTE_ERROR,
        Category.UNSUPPORTED_OPERAND,
        Category.WRONG_ARG_TYPES,
        Category.NOT_WRITABLE,
    }
)
"""The five categories observed on unannotated programs; detectors add
bad-return-type when annotations are consumed."""

__all__ = [
    "BOOL", "BYTES", "FLOAT", "INT", "NONE", "STR", "UNKNOWN",
    "Category", "CheckConfig", "ClassT", "DETECTION_CATEGORIES", "Definedness",
    "Diagnostic", "DictT", "FunctionT", "ListT", "ScopeModel", "SetT", "StubSet",
    "TupleT", "TypeTerm", "UnionT", "build_scopes", "check", "collect_local_names",
    "compatible", "definitely_incompatible", "expr_type", "merge_stub_sets",
    "parse_stub_set", "resolve_annotation", "union_of",
]
