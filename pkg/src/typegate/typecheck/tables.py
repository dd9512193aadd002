"""Closed typing tables: operators, attributes, builtin call signatures.

Every rule here is over fully known types; anything touching Unknown is
handled upstream and stays silent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from typegate.typecheck.types import (
    BOOL, BYTES, FLOAT, INT, NONE, STR, UNKNOWN,
    BoolT, BytesT, ClassT, DictT, FloatT, FunctionT, IntT, ListT,
    SetT, StrT, TupleT, TypeTerm, UnknownT, compatible, members_of, union_of,
)

RANGE = ClassT("range")

_NUMERIC = (BoolT, IntT, FloatT)
_SUBSCRIPTABLE = (StrT, BytesT, TupleT, ListT, DictT)


def _is_num(t: TypeTerm) -> bool:
    return isinstance(t, _NUMERIC)


def _num_join(a: TypeTerm, b: TypeTerm) -> TypeTerm:
    if isinstance(a, FloatT) or isinstance(b, FloatT):
        return FLOAT
    return INT


def binop_result(op: str, left: TypeTerm, right: TypeTerm) -> TypeTerm | None:
    """Result type of a concrete (non-union, non-Unknown) operand pair; None = invalid."""
    if op == "/":
        return FLOAT if _is_num(left) and _is_num(right) else None
    if op in ("+", "-", "*", "%", "//", "**"):
        if _is_num(left) and _is_num(right):
            return _num_join(left, right)
        if op == "-":
            if isinstance(left, SetT) and isinstance(right, SetT):
                return SetT(union_of(left.elem, right.elem))
            return None
        if op == "+":
            if isinstance(left, StrT) and isinstance(right, StrT):
                return STR
            if isinstance(left, BytesT) and isinstance(right, BytesT):
                return BYTES
            if isinstance(left, ListT) and isinstance(right, ListT):
                return ListT(union_of(left.elem, right.elem))
            if isinstance(left, TupleT) and isinstance(right, TupleT):
                if left.elems is not None and right.elems is not None:
                    return TupleT(left.elems + right.elems)
                return TupleT(None)
            return None
        if op == "*":
            seq, num = (left, right) if _is_num(right) else (right, left)
            if not _is_num(num) or isinstance(num, FloatT):
                return None
            if isinstance(seq, StrT):
                return STR
            if isinstance(seq, BytesT):
                return BYTES
            if isinstance(seq, ListT):
                return seq
            if isinstance(seq, TupleT):
                return TupleT(None)
            return None
        if op == "%":
            if isinstance(left, StrT):
                return STR  # printf-style formatting accepts anything
            if isinstance(left, BytesT):
                return BYTES
            return None
        return None
    if op in ("&", "|", "^"):
        if isinstance(left, BoolT) and isinstance(right, BoolT):
            return BOOL
        if _is_num(left) and _is_num(right):
            if isinstance(left, FloatT) or isinstance(right, FloatT):
                return None
            return INT
        if isinstance(left, SetT) and isinstance(right, SetT):
            return SetT(union_of(left.elem, right.elem))
        if op == "|" and isinstance(left, DictT) and isinstance(right, DictT):
            return DictT(union_of(left.key, right.key), union_of(left.value, right.value))
        return None
    if op in ("<<", ">>"):
        if _is_num(left) and _is_num(right) and not (
            isinstance(left, FloatT) or isinstance(right, FloatT)
        ):
            return INT
        return None
    if op == "@":
        return None  # matrix product is outside the builtin table
    return None


def order_comparable(left: TypeTerm, right: TypeTerm) -> bool:
    """Valid operand pair for < <= > >= (a concrete pair)."""
    if _is_num(left) and _is_num(right):
        return True
    pairs = ((StrT, StrT), (BytesT, BytesT), (ListT, ListT), (TupleT, TupleT), (SetT, SetT))
    return any(isinstance(left, a) and isinstance(right, b) for a, b in pairs)


def membership_valid(needle: TypeTerm, container: TypeTerm) -> bool:
    """Valid operand pair for `in` / `not in` (a concrete pair)."""
    if isinstance(container, StrT):
        return isinstance(needle, StrT)
    if isinstance(container, BytesT):
        # a bytes needle is a subsequence test, an int needle a byte-value test
        return isinstance(needle, (BytesT, IntT, BoolT))
    if isinstance(container, (ListT, SetT, TupleT, DictT)) or container == RANGE:
        return True
    return False


def unary_result(op: str, operand: TypeTerm) -> TypeTerm | None:
    if op == "not":
        return BOOL
    if op in ("+", "-"):
        if isinstance(operand, FloatT):
            return FLOAT
        if _is_num(operand):
            return INT
        return None
    if op == "~":
        if _is_num(operand) and not isinstance(operand, FloatT):
            return INT
        return None
    return None


def subscript_result(base: TypeTerm, index: TypeTerm, is_slice: bool) -> TypeTerm | None:
    """Load-subscript result for a concrete base; None = invalid."""
    if is_slice:
        if isinstance(base, StrT):
            return STR
        if isinstance(base, BytesT):
            return BYTES
        if isinstance(base, ListT):
            return base
        if isinstance(base, TupleT):
            return TupleT(None)
        return None
    if isinstance(base, DictT):
        if not isinstance(index, UnknownT) and not any(
            _key_ok(m, base.key) for m in _members(index)
        ):
            return None
        return base.value
    int_index = isinstance(index, UnknownT) or any(
        isinstance(m, (BoolT, IntT)) for m in _members(index)
    )
    if isinstance(base, StrT):
        return STR if int_index else None
    if isinstance(base, BytesT):
        return INT if int_index else None
    if isinstance(base, ListT):
        return base.elem if int_index else None
    if isinstance(base, TupleT):
        if not int_index:
            return None
        if base.elems is None:
            return UNKNOWN
        return union_of(*base.elems) if base.elems else UNKNOWN
    if base == RANGE:
        return INT if int_index else None
    return None


def _members(t: TypeTerm) -> tuple[TypeTerm, ...]:
    return members_of(t)


def _key_ok(key: TypeTerm, declared: TypeTerm) -> bool:
    return compatible(key, declared)


def iterable_elem(t: TypeTerm) -> TypeTerm | None:
    """Element type when iterated; None = not iterable."""
    if isinstance(t, UnknownT):
        return UNKNOWN
    if isinstance(t, ListT) or isinstance(t, SetT):
        return t.elem
    if isinstance(t, TupleT):
        if t.elems is None:
            return UNKNOWN
        return union_of(*t.elems) if t.elems else UNKNOWN
    if isinstance(t, DictT):
        return t.key
    if isinstance(t, StrT):
        return STR
    if isinstance(t, BytesT):
        return INT
    if t == RANGE:
        return INT
    return None


# -- attribute tables -----------------------------------------------------------

def _fn(ret: TypeTerm, *params: TypeTerm) -> FunctionT:
    return FunctionT(tuple(params), ret)


def _fn_any(ret: TypeTerm) -> FunctionT:
    return FunctionT(None, ret)


_STR_ATTRS: dict[str, Callable[[StrT], TypeTerm]] = {
    "upper": lambda t: _fn(STR),
    "lower": lambda t: _fn(STR),
    "title": lambda t: _fn(STR),
    "capitalize": lambda t: _fn(STR),
    "strip": lambda t: _fn_any(STR),
    "lstrip": lambda t: _fn_any(STR),
    "rstrip": lambda t: _fn_any(STR),
    "split": lambda t: _fn_any(ListT(STR)),
    "rsplit": lambda t: _fn_any(ListT(STR)),
    "splitlines": lambda t: _fn_any(ListT(STR)),
    "join": lambda t: _fn(STR, UNKNOWN),
    "replace": lambda t: _fn(STR, STR, STR),
    "startswith": lambda t: _fn_any(BOOL),
    "endswith": lambda t: _fn_any(BOOL),
    "find": lambda t: _fn_any(INT),
    "rfind": lambda t: _fn_any(INT),
    "index": lambda t: _fn_any(INT),
    "count": lambda t: _fn_any(INT),
    "format": lambda t: _fn_any(STR),
    "encode": lambda t: _fn_any(BYTES),
    "isdigit": lambda t: _fn(BOOL),
    "isalpha": lambda t: _fn(BOOL),
    "isupper": lambda t: _fn(BOOL),
    "islower": lambda t: _fn(BOOL),
    "isspace": lambda t: _fn(BOOL),
    "zfill": lambda t: _fn(STR, INT),
}

_BYTES_ATTRS: dict[str, Callable[[BytesT], TypeTerm]] = {
    "decode": lambda t: _fn_any(STR),
    "hex": lambda t: _fn_any(STR),
    "split": lambda t: _fn_any(ListT(BYTES)),
    "strip": lambda t: _fn_any(BYTES),
    "upper": lambda t: _fn(BYTES),
    "lower": lambda t: _fn(BYTES),
    "replace": lambda t: _fn(BYTES, BYTES, BYTES),
    "startswith": lambda t: _fn_any(BOOL),
    "endswith": lambda t: _fn_any(BOOL),
    "find": lambda t: _fn_any(INT),
    "count": lambda t: _fn_any(INT),
    "join": lambda t: _fn(BYTES, UNKNOWN),
}

_LIST_ATTRS: dict[str, Callable[[ListT], TypeTerm]] = {
    "append": lambda t: _fn(NONE, UNKNOWN),
    "extend": lambda t: _fn(NONE, UNKNOWN),
    "insert": lambda t: _fn(NONE, INT, UNKNOWN),
    "remove": lambda t: _fn(NONE, UNKNOWN),
    "pop": lambda t: _fn_any(t.elem),
    "clear": lambda t: _fn(NONE),
    "index": lambda t: _fn_any(INT),
    "count": lambda t: _fn(INT, UNKNOWN),
    "sort": lambda t: _fn_any(NONE),
    "reverse": lambda t: _fn(NONE),
    "copy": lambda t: _fn(t),
}

_DICT_ATTRS: dict[str, Callable[[DictT], TypeTerm]] = {
    "get": lambda t: _fn_any(union_of(t.value, NONE)),
    "keys": lambda t: _fn(ListT(t.key)),
    "values": lambda t: _fn(ListT(t.value)),
    "items": lambda t: _fn(ListT(TupleT((t.key, t.value)))),
    "pop": lambda t: _fn_any(t.value),
    "update": lambda t: _fn_any(NONE),
    "setdefault": lambda t: _fn_any(t.value),
    "clear": lambda t: _fn(NONE),
    "copy": lambda t: _fn(t),
}

_SET_ATTRS: dict[str, Callable[[SetT], TypeTerm]] = {
    "add": lambda t: _fn(NONE, UNKNOWN),
    "remove": lambda t: _fn(NONE, UNKNOWN),
    "discard": lambda t: _fn(NONE, UNKNOWN),
    "pop": lambda t: _fn(t.elem),
    "clear": lambda t: _fn(NONE),
    "union": lambda t: _fn_any(t),
    "intersection": lambda t: _fn_any(t),
    "difference": lambda t: _fn_any(t),
    "issubset": lambda t: _fn_any(BOOL),
    "issuperset": lambda t: _fn_any(BOOL),
    "copy": lambda t: _fn(t),
}

_TUPLE_ATTRS: dict[str, Callable[[TupleT], TypeTerm]] = {
    "index": lambda t: _fn_any(INT),
    "count": lambda t: _fn(INT, UNKNOWN),
}


def attribute_type(base: TypeTerm, attr: str) -> TypeTerm | None:
    """Attribute of a concrete base type; None = no such attribute."""
    if isinstance(base, StrT):
        factory = _STR_ATTRS.get(attr)
    elif isinstance(base, BytesT):
        factory = _BYTES_ATTRS.get(attr)
    elif isinstance(base, ListT):
        factory = _LIST_ATTRS.get(attr)
    elif isinstance(base, DictT):
        factory = _DICT_ATTRS.get(attr)
    elif isinstance(base, SetT):
        factory = _SET_ATTRS.get(attr)
    elif isinstance(base, TupleT):
        factory = _TUPLE_ATTRS.get(attr)
    elif isinstance(base, ClassT):
        return base.attr_type(attr)
    elif isinstance(base, FunctionT):
        return UNKNOWN  # function/class objects stay opaque
    else:
        return None  # scalars and None expose no attributes
    if factory is None:
        return None
    return factory(base)  # type: ignore[arg-type]


# -- builtin call signatures ------------------------------------------------------

_CONTAINERS = (StrT, BytesT, TupleT, ListT, DictT, SetT)


@dataclass(frozen=True)
class BuiltinSig:
    """Arity window, per-argument acceptance and result rule for one builtin."""

    name: str
    min_args: int
    max_args: int
    accepts: Callable[[int, TypeTerm], bool]
    result: Callable[[tuple[TypeTerm, ...]], TypeTerm]


def _accept_any(_i: int, _t: TypeTerm) -> bool:
    return True


def _first(types: tuple[TypeTerm, ...]) -> TypeTerm:
    return types[0] if types else UNKNOWN


BUILTIN_SIGS: dict[str, BuiltinSig] = {
    "len": BuiltinSig("len", 1, 1,
                      lambda i, t: isinstance(t, _CONTAINERS) or t == RANGE,
                      lambda ts: INT),
    "abs": BuiltinSig("abs", 1, 1,
                      lambda i, t: isinstance(t, _NUMERIC),
                      lambda ts: FLOAT if isinstance(_first(ts), FloatT) else INT),
    "range": BuiltinSig("range", 1, 3,
                        lambda i, t: isinstance(t, (BoolT, IntT)),
                        lambda ts: RANGE),
    "sorted": BuiltinSig("sorted", 1, 1,
                         lambda i, t: isinstance(t, _CONTAINERS) or t == RANGE,
                         lambda ts: ListT(iterable_elem(_first(ts)) or UNKNOWN)),
    "iter": BuiltinSig("iter", 1, 1,
                       lambda i, t: isinstance(t, _CONTAINERS) or t == RANGE,
                       lambda ts: UNKNOWN),
    "str": BuiltinSig("str", 0, 1, _accept_any, lambda ts: STR),
    "repr": BuiltinSig("repr", 1, 1, _accept_any, lambda ts: STR),
    "int": BuiltinSig("int", 0, 2,
                      lambda i, t: isinstance(t, (StrT, BytesT) + _NUMERIC) if i == 0
                      else isinstance(t, (BoolT, IntT)),
                      lambda ts: INT),
    "float": BuiltinSig("float", 0, 1,
                        lambda i, t: isinstance(t, (StrT, BytesT) + _NUMERIC),
                        lambda ts: FLOAT),
    "bool": BuiltinSig("bool", 0, 1, _accept_any, lambda ts: BOOL),
    "list": BuiltinSig("list", 0, 1,
                       lambda i, t: isinstance(t, _CONTAINERS) or t == RANGE,
                       lambda ts: ListT(iterable_elem(_first(ts)) or UNKNOWN) if ts else ListT(UNKNOWN)),
    "tuple": BuiltinSig("tuple", 0, 1,
                        lambda i, t: isinstance(t, _CONTAINERS) or t == RANGE,
                        lambda ts: TupleT(None)),
    "set": BuiltinSig("set", 0, 1,
                      lambda i, t: isinstance(t, _CONTAINERS) or t == RANGE,
                      lambda ts: SetT(iterable_elem(_first(ts)) or UNKNOWN) if ts else SetT(UNKNOWN)),
    "dict": BuiltinSig("dict", 0, 0, _accept_any, lambda ts: DictT(UNKNOWN, UNKNOWN)),
}

# builtins the engine knows by name but not by signature: calls stay silent
OPAQUE_BUILTINS = frozenset(
    {
        "print", "enumerate", "zip", "min", "max", "sum", "isinstance", "issubclass",
        "type", "getattr", "setattr", "hasattr", "id", "hash", "input", "open",
        "map", "filter", "next", "reversed", "round", "divmod", "ord", "chr",
        "any", "all", "vars", "dir", "format", "callable", "frozenset", "bytes",
        "bytearray", "object", "super", "Exception", "ValueError", "TypeError",
        "KeyError", "IndexError", "AttributeError", "RuntimeError", "StopIteration",
        "NotImplementedError", "NotImplemented", "__name__",
    }
)
