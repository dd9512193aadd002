"""Type lattice of the checker.

Unknown is the top element: any operation on Unknown is silent and yields
Unknown. Unions are flat, deduplicated and order-insensitive; a union with
an Unknown member collapses to Unknown.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TypeTerm:
    def display(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class UnknownT(TypeTerm):
    def display(self) -> str:
        return "Unknown"


@dataclass(frozen=True)
class BoolT(TypeTerm):
    def display(self) -> str:
        return "bool"


@dataclass(frozen=True)
class IntT(TypeTerm):
    def display(self) -> str:
        return "int"


@dataclass(frozen=True)
class FloatT(TypeTerm):
    def display(self) -> str:
        return "float"


@dataclass(frozen=True)
class StrT(TypeTerm):
    def display(self) -> str:
        return "str"


@dataclass(frozen=True)
class BytesT(TypeTerm):
    def display(self) -> str:
        return "bytes"


@dataclass(frozen=True)
class NoneT(TypeTerm):
    def display(self) -> str:
        return "None"


@dataclass(frozen=True)
class TupleT(TypeTerm):
    """Immutable sequence; elems=None means unknown arity."""

    elems: tuple[TypeTerm, ...] | None = None

    def display(self) -> str:
        if self.elems is None:
            return "tuple"
        return "tuple[" + ", ".join(e.display() for e in self.elems) + "]"


@dataclass(frozen=True)
class ListT(TypeTerm):
    elem: TypeTerm

    def display(self) -> str:
        return f"list[{self.elem.display()}]"


@dataclass(frozen=True)
class SetT(TypeTerm):
    elem: TypeTerm

    def display(self) -> str:
        return f"set[{self.elem.display()}]"


@dataclass(frozen=True)
class DictT(TypeTerm):
    key: TypeTerm
    value: TypeTerm

    def display(self) -> str:
        return f"dict[{self.key.display()}, {self.value.display()}]"


@dataclass(frozen=True)
class FunctionT(TypeTerm):
    """params=None leaves arity and argument types unchecked."""

    params: tuple[TypeTerm, ...] | None
    ret: TypeTerm

    def display(self) -> str:
        if self.params is None:
            return f"Callable[..., {self.ret.display()}]"
        args = ", ".join(p.display() for p in self.params)
        return f"Callable[[{args}], {self.ret.display()}]"


@dataclass(frozen=True)
class ClassT(TypeTerm):
    name: str
    attrs: tuple[tuple[str, TypeTerm], ...] = ()

    def display(self) -> str:
        return self.name

    def attr_type(self, attr: str) -> TypeTerm | None:
        for key, value in self.attrs:
            if key == attr:
                return value
        return None


@dataclass(frozen=True)
class UnionT(TypeTerm):
    members: frozenset[TypeTerm]

    def display(self) -> str:
        return " | ".join(sorted(m.display() for m in self.members))


UNKNOWN = UnknownT()
BOOL = BoolT()
INT = IntT()
FLOAT = FloatT()
STR = StrT()
BYTES = BytesT()
NONE = NoneT()


def union_of(*types: TypeTerm) -> TypeTerm:
    """Normalized union: flat, deduplicated; Unknown absorbs everything."""
    members: set[TypeTerm] = set()
    for t in types:
        if isinstance(t, UnknownT):
            return UNKNOWN
        if isinstance(t, UnionT):
            members.update(t.members)
        else:
            members.add(t)
    if not members:
        return UNKNOWN
    if len(members) == 1:
        return next(iter(members))
    return UnionT(frozenset(members))


def members_of(t: TypeTerm) -> tuple[TypeTerm, ...]:
    if isinstance(t, UnionT):
        return tuple(t.members)
    return (t,)


def is_unknown(t: TypeTerm) -> bool:
    return isinstance(t, UnknownT)


def compatible(t: TypeTerm, target: TypeTerm) -> bool:
    """t usable where target is expected. Bool <= Int <= Float; Unknown fits everywhere."""
    if isinstance(t, UnknownT) or isinstance(target, UnknownT):
        return True
    if isinstance(t, UnionT):
        return all(compatible(m, target) for m in t.members)
    if isinstance(target, UnionT):
        return any(compatible(t, m) for m in target.members)
    if t == target:
        return True
    if isinstance(t, BoolT) and isinstance(target, (IntT, FloatT)):
        return True
    if isinstance(t, IntT) and isinstance(target, FloatT):
        return True
    if isinstance(t, ListT) and isinstance(target, ListT):
        return compatible(t.elem, target.elem)
    if isinstance(t, SetT) and isinstance(target, SetT):
        return compatible(t.elem, target.elem)
    if isinstance(t, DictT) and isinstance(target, DictT):
        return compatible(t.key, target.key) and compatible(t.value, target.value)
    if isinstance(t, TupleT) and isinstance(target, TupleT):
        if t.elems is None or target.elems is None:
            return True
        return len(t.elems) == len(target.elems) and all(
            compatible(a, b) for a, b in zip(t.elems, target.elems)
        )
    if isinstance(t, FunctionT) and isinstance(target, FunctionT):
        return True
    if isinstance(t, ClassT) and isinstance(target, ClassT):
        return t.name == target.name
    return False


def definitely_incompatible(t: TypeTerm, target: TypeTerm) -> bool:
    """True only when no member of t could satisfy target (diagnosis gate)."""
    if isinstance(t, UnknownT) or isinstance(target, UnknownT):
        return False
    return not any(compatible(m, target) for m in members_of(t))
