"""Flow-aware definedness and type analysis with the closed diagnostic taxonomy.

Single-pass abstract interpretation over the function body: if/else joins
take the pointwise meet of definedness (bound vs unbound -> maybe-bound) and
the union of types; loop bodies are analyzed once under may-execute-zero-times
semantics. The checker is quiet under uncertainty: no diagnostic ever depends
on an Unknown operand, and union-typed operands are only diagnosed when the
operation is invalid for every member.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from typegate.source import syntax as syn
from typegate.source.occurrences import statement_exprs, walk_expr, walk_statements
from typegate.source.tokens import SourceSpan
from typegate.typecheck import tables
from typegate.typecheck.stubs import StubSet, merge_stub_sets, resolve_annotation
from typegate.typecheck.tables import BUILTIN_SIGS, OPAQUE_BUILTINS
from typegate.typecheck.types import (
    BOOL, BYTES, FLOAT, INT, NONE, STR, UNKNOWN,
    BytesT, ClassT, DictT, FunctionT, ListT, SetT, StrT, TupleT, TypeTerm,
    UnknownT, definitely_incompatible, is_unknown, members_of, union_of,
)


class Category(enum.Enum):
    NAME_ERROR = "name-error"
    ATTRIBUTE_ERROR = "attribute-error"
    UNSUPPORTED_OPERAND = "unsupported-operand"
    WRONG_ARG_TYPES = "wrong-arg-types"
    NOT_WRITABLE = "not-writable"
    BAD_RETURN_TYPE = "bad-return-type"
    IMPORT_ERROR = "import-error"
    INTERNAL_ERROR = "internal-error"


@dataclass(frozen=True)
class Diagnostic:
    category: Category
    span: SourceSpan
    message: str
    symbol: str | None = None


@dataclass(frozen=True)
class CheckConfig:
    """use_annotations consumes the analyzed function's own annotations;
    ambient stubs and assumed names are in force in both modes."""

    use_annotations: bool = False
    ambient_stubs: StubSet | None = None
    assumed_names: frozenset[str] = frozenset()


class Definedness(enum.IntEnum):
    UNBOUND = 0
    MAYBE = 1
    BOUND = 2


@dataclass
class ScopeModel:
    """Definedness of every load, keyed by its token index."""

    load_definedness: dict[int, Definedness]
    local_names: frozenset[str]
    param_names: frozenset[str]


class InternalCheckError(Exception):
    pass


_Binding = tuple[Definedness, TypeTerm]
_ABSENT: _Binding = (Definedness.UNBOUND, UNKNOWN)


def collect_local_names(fn: syn.FunctionDef) -> tuple[frozenset[str], frozenset[str]]:
    """(all function-local names, parameter names)."""
    params = frozenset(p.name for p in fn.params)
    stores: set[str] = set(params)
    for stmt in walk_statements(fn.body):
        for expr in statement_exprs(stmt):
            for node in walk_expr(expr):
                if isinstance(node, syn.Name) and node.ctx in (syn.Usage.STORE, syn.Usage.DELETE):
                    stores.add(node.id)
    return frozenset(stores), params


def _is_generator(fn: syn.FunctionDef) -> bool:
    for stmt in walk_statements(fn.body):
        for expr in statement_exprs(stmt):
            for node in walk_expr(expr):
                if isinstance(node, syn.YieldExpr):
                    return True
    return False


class _Engine:
    def __init__(self, tree: syn.SyntaxTree, config: CheckConfig):
        self.tree = tree
        self.config = config
        self.diags: list[Diagnostic] = []
        self.loads: dict[int, Definedness] = {}
        self.locals, self.params = collect_local_names(tree.function)

        stub_set = config.ambient_stubs
        for item in tree.preamble:
            if isinstance(item, (syn.FunctionDef, syn.ClassStub)):
                stub_set = merge_stub_sets(stub_set, _inline_stub_set(item))
        self.stubs = stub_set if stub_set is not None else StubSet.empty()
        self.class_names = {
            name: t.ret  # constructor binding: FunctionT(None, ClassT)
            for name, t in self.stubs.as_dict().items()
            if isinstance(t, FunctionT) and isinstance(t.ret, ClassT)
        }
        self.ambient: dict[str, TypeTerm] = dict(self.stubs.as_dict())
        for item in tree.preamble:
            if isinstance(item, syn.ImportStmt):
                for name in item.bound_names:
                    self.ambient.setdefault(name, UNKNOWN)
        for name in config.assumed_names:
            self.ambient.setdefault(name, UNKNOWN)
        self.generator = _is_generator(tree.function)

    # -- entry ------------------------------------------------------------------

    def run(self) -> tuple[list[Diagnostic], ScopeModel]:
        fn = self.tree.function
        env: dict[str, _Binding] = {}
        for param in fn.params:
            env[param.name] = (Definedness.BOUND, self._param_type(param))
        declared_return = (
            resolve_annotation(fn.returns, self.class_names)
            if (self.config.use_annotations and fn.returns is not None)
            else None
        )
        self.declared_return = declared_return
        self._walk_block(fn.body, env)
        ordered = sorted(
            set(self.diags),
            key=lambda d: (d.span.line, d.span.column, d.span.token_index, d.category.value, d.message),
        )
        model = ScopeModel(dict(self.loads), self.locals, self.params)
        return ordered, model

    def _param_type(self, param: syn.Param) -> TypeTerm:
        if self.config.use_annotations and param.annotation is not None:
            return resolve_annotation(param.annotation, self.class_names)
        if param.default is not None:
            return self._eval(param.default, {})
        return UNKNOWN

    # -- statements ----------------------------------------------------------------

    def _walk_block(self, body: tuple[syn.Stmt, ...], env: dict[str, _Binding]) -> dict[str, _Binding]:
        for stmt in body:
            env = self._walk_stmt(stmt, env)
        return env

    def _walk_stmt(self, stmt: syn.Stmt, env: dict[str, _Binding]) -> dict[str, _Binding]:
        if isinstance(stmt, syn.ExprStmt):
            self._eval(stmt.value, env)
            return env
        if isinstance(stmt, syn.Assign):
            value_t = self._eval(stmt.value, env)
            for target in stmt.targets:
                self._bind(target, value_t, env)
            return env
        if isinstance(stmt, syn.AugAssign):
            current = self._eval_aug_target_load(stmt.target, env)
            value_t = self._eval(stmt.value, env)
            result = self._binop_type(stmt.op, current, value_t, stmt.target.span)
            self._bind(stmt.target, result, env, check_store=True)
            return env
        if isinstance(stmt, syn.AnnAssign):
            declared = (
                resolve_annotation(stmt.annotation, self.class_names)
                if self.config.use_annotations
                else None
            )
            if stmt.value is None:
                return env  # declaration without binding
            value_t = self._eval(stmt.value, env)
            bound_t = declared if declared is not None else value_t
            self._bind(stmt.target, bound_t, env)
            return env
        if isinstance(stmt, syn.Return):
            value_t = self._eval(stmt.value, env) if stmt.value is not None else NONE
            if self.declared_return is not None and not self.generator:
                if definitely_incompatible(value_t, self.declared_return):
                    self._report(
                        Category.BAD_RETURN_TYPE,
                        stmt.span,
                        f"bad return type: expected {self.declared_return.display()}, "
                        f"got {value_t.display()}",
                    )
            return env
        if isinstance(stmt, syn.Delete):
            for target in stmt.targets:
                if isinstance(target, syn.Name):
                    self._load_name(target, env)
                    env[target.id] = (Definedness.UNBOUND, UNKNOWN)
                else:
                    self._bind(target, UNKNOWN, env, check_store=True)
            return env
        if isinstance(stmt, (syn.Pass, syn.Break, syn.Continue)):
            return env
        if isinstance(stmt, syn.If):
            self._eval(stmt.cond, env)
            then_env = self._walk_block(stmt.body, dict(env))
            else_env = self._walk_block(stmt.orelse, dict(env)) if stmt.orelse else dict(env)
            return _merge(then_env, else_env)
        if isinstance(stmt, syn.While):
            self._eval(stmt.cond, env)
            body_env = self._walk_block(stmt.body, dict(env))
            return _merge(env, body_env)
        if isinstance(stmt, syn.For):
            iter_t = self._eval(stmt.iter, env)
            elem = self._iterate(iter_t, stmt.iter.span)
            body_env = dict(env)
            self._bind(stmt.target, elem, body_env)
            body_env = self._walk_block(stmt.body, body_env)
            return _merge(env, body_env)
        raise InternalCheckError(f"unhandled statement {type(stmt).__name__}")

    # -- binding -----------------------------------------------------------------

    def _bind(self, target: syn.Expr, value_t: TypeTerm, env: dict[str, _Binding],
              check_store: bool = True) -> None:
        if isinstance(target, syn.Name):
            env[target.id] = (Definedness.BOUND, value_t)
            return
        if isinstance(target, (syn.TupleLit, syn.ListLit)):
            parts = self._unpack(value_t, len(target.elts))
            for elt, part in zip(target.elts, parts):
                self._bind(elt, part, env)
            return
        if isinstance(target, syn.Attribute):
            base_t = self._eval(target.value, env)
            if check_store:
                self._check_attribute_store(base_t, target)
            return
        if isinstance(target, syn.Subscript):
            base_t = self._eval(target.value, env)
            index_t = self._eval_index(target.index, env)
            if check_store:
                self._check_subscript_store(base_t, index_t, target)
            return
        raise InternalCheckError(f"unhandled target {type(target).__name__}")

    def _unpack(self, value_t: TypeTerm, count: int) -> list[TypeTerm]:
        if isinstance(value_t, TupleT) and value_t.elems is not None and len(value_t.elems) == count:
            return list(value_t.elems)
        if isinstance(value_t, (ListT, SetT)):
            return [value_t.elem] * count
        if isinstance(value_t, StrT):
            return [STR] * count
        return [UNKNOWN] * count

    def _check_attribute_store(self, base_t: TypeTerm, target: syn.Attribute) -> None:
        if is_unknown(base_t):
            return
        members = members_of(base_t)
        if all(not isinstance(m, (ClassT, FunctionT, UnknownT)) for m in members):
            self._report(
                Category.ATTRIBUTE_ERROR,
                target.attr_span,
                f"cannot set attribute {target.attr!r} on {base_t.display()}",
                symbol=target.attr,
            )

    def _check_subscript_store(self, base_t: TypeTerm, index_t: TypeTerm,
                               target: syn.Subscript) -> None:
        if is_unknown(base_t):
            return
        members = members_of(base_t)
        if any(isinstance(m, (ListT, DictT, UnknownT)) for m in members):
            if all(not isinstance(m, (TupleT, StrT, BytesT)) for m in members):
                # mutable subscript: check index validity only
                self._check_subscript_index(base_t, index_t, target)
            return
        if any(isinstance(m, (TupleT, StrT, BytesT)) for m in members):
            self._report(
                Category.NOT_WRITABLE,
                target.span,
                f"{base_t.display()} does not support item assignment",
            )
            return
        self._report(
            Category.UNSUPPORTED_OPERAND,
            target.span,
            f"unsupported operand type for item assignment: {base_t.display()}",
        )

    def _check_subscript_index(self, base_t: TypeTerm, index_t: TypeTerm,
                               target: syn.Subscript) -> None:
        if is_unknown(index_t):
            return
        invalid_everywhere = all(
            tables.subscript_result(b, index_t, isinstance(target.index, syn.SliceExpr)) is None
            for b in members_of(base_t)
            if isinstance(b, (ListT, DictT))
        )
        relevant = [b for b in members_of(base_t) if isinstance(b, (ListT, DictT))]
        if relevant and invalid_everywhere:
            self._report(
                Category.UNSUPPORTED_OPERAND,
                target.span,
                f"unsupported index type {index_t.display()} for {base_t.display()}",
            )

    # -- expressions -----------------------------------------------------------------

    def _eval(self, expr: syn.Expr, env: dict[str, _Binding]) -> TypeTerm:
        if isinstance(expr, syn.Name):
            return self._load_name(expr, env)
        if isinstance(expr, syn.NumberLit):
            return {"int": INT, "float": FLOAT}.get(expr.numeric_kind, UNKNOWN)
        if isinstance(expr, syn.StringLit):
            return BYTES if expr.is_bytes else STR
        if isinstance(expr, syn.BoolLit):
            return BOOL
        if isinstance(expr, syn.NoneLit):
            return NONE
        if isinstance(expr, syn.EllipsisLit):
            return UNKNOWN
        if isinstance(expr, syn.TupleLit):
            return TupleT(tuple(self._eval(e, env) for e in expr.elts))
        if isinstance(expr, syn.ListLit):
            if not expr.elts:
                return ListT(UNKNOWN)
            return ListT(union_of(*(self._eval(e, env) for e in expr.elts)))
        if isinstance(expr, syn.SetLit):
            if not expr.elts:
                return SetT(UNKNOWN)
            return SetT(union_of(*(self._eval(e, env) for e in expr.elts)))
        if isinstance(expr, syn.DictLit):
            if not expr.items:
                return DictT(UNKNOWN, UNKNOWN)
            keys = union_of(*(self._eval(k, env) for k, _ in expr.items))
            values = union_of(*(self._eval(v, env) for _, v in expr.items))
            return DictT(keys, values)
        if isinstance(expr, syn.Attribute):
            return self._eval_attribute(expr, env)
        if isinstance(expr, syn.Subscript):
            return self._eval_subscript(expr, env)
        if isinstance(expr, syn.Call):
            return self._eval_call(expr, env)
        if isinstance(expr, syn.BinOp):
            left = self._eval(expr.left, env)
            right = self._eval(expr.right, env)
            return self._binop_type(expr.op, left, right, expr.span)
        if isinstance(expr, syn.UnaryOp):
            operand = self._eval(expr.operand, env)
            return self._unary_type(expr.op, operand, expr.span)
        if isinstance(expr, syn.BoolOp):
            return union_of(*(self._eval(v, env) for v in expr.values))
        if isinstance(expr, syn.Compare):
            return self._eval_compare(expr, env)
        if isinstance(expr, syn.YieldExpr):
            if expr.value is not None:
                self._eval(expr.value, env)
            return UNKNOWN
        if isinstance(expr, syn.LambdaExpr):
            return UNKNOWN
        if isinstance(expr, syn.SliceExpr):
            return self._eval_index(expr, env)
        raise InternalCheckError(f"unhandled expression {type(expr).__name__}")

    def _load_name(self, name: syn.Name, env: dict[str, _Binding]) -> TypeTerm:
        ti = name.span.token_index
        if name.id in self.locals:
            defined, t = env.get(name.id, _ABSENT)
            self.loads[ti] = defined
            if defined is Definedness.BOUND:
                return t
            message = (
                f"name {name.id!r} may be undefined"
                if defined is Definedness.MAYBE
                else f"name {name.id!r} is not defined"
            )
            self._report(Category.NAME_ERROR, name.span, message, symbol=name.id)
            return UNKNOWN
        if name.id in self.ambient:
            self.loads[ti] = Definedness.BOUND
            return self.ambient[name.id]
        if name.id in BUILTIN_SIGS:
            self.loads[ti] = Definedness.BOUND
            return FunctionT(None, UNKNOWN)
        if name.id in OPAQUE_BUILTINS:
            self.loads[ti] = Definedness.BOUND
            return UNKNOWN
        self.loads[ti] = Definedness.UNBOUND
        self._report(Category.NAME_ERROR, name.span, f"name {name.id!r} is not defined",
                     symbol=name.id)
        return UNKNOWN

    def _eval_aug_target_load(self, target: syn.Expr, env: dict[str, _Binding]) -> TypeTerm:
        if isinstance(target, syn.Name):
            return self._load_name(target, env)
        if isinstance(target, syn.Attribute):
            return self._eval_attribute(target, env)
        if isinstance(target, syn.Subscript):
            return self._eval_subscript(target, env)
        raise InternalCheckError("invalid augmented assignment target")

    def _eval_attribute(self, expr: syn.Attribute, env: dict[str, _Binding]) -> TypeTerm:
        base_t = self._eval(expr.value, env)
        if is_unknown(base_t):
            return UNKNOWN
        found = [
            t for m in members_of(base_t)
            if (t := tables.attribute_type(m, expr.attr)) is not None
        ]
        if not found:
            self._report(
                Category.ATTRIBUTE_ERROR,
                expr.attr_span,
                f"no attribute {expr.attr!r} on {base_t.display()}",
                symbol=expr.attr,
            )
            return UNKNOWN
        return union_of(*found)

    def _eval_index(self, index: syn.Expr, env: dict[str, _Binding]) -> TypeTerm:
        if isinstance(index, syn.SliceExpr):
            for part in (index.lower, index.upper, index.step):
                if part is not None:
                    part_t = self._eval(part, env)
                    if not is_unknown(part_t) and all(
                        tables.unary_result("~", m) is None for m in members_of(part_t)
                    ):
                        self._report(
                            Category.UNSUPPORTED_OPERAND,
                            part.span,
                            f"slice indices must be integers, not {part_t.display()}",
                        )
            return INT
        return self._eval(index, env)

    def _eval_subscript(self, expr: syn.Subscript, env: dict[str, _Binding]) -> TypeTerm:
        base_t = self._eval(expr.value, env)
        index_t = self._eval_index(expr.index, env)
        if is_unknown(base_t):
            return UNKNOWN
        is_slice = isinstance(expr.index, syn.SliceExpr)
        results = [
            r for m in members_of(base_t)
            if (r := tables.subscript_result(m, index_t, is_slice)) is not None
        ]
        if not results:
            self._report(
                Category.UNSUPPORTED_OPERAND,
                expr.span,
                "unsupported operand type(s) for item retrieval: "
                f"{base_t.display()} and {index_t.display()}",
            )
            return UNKNOWN
        return union_of(*results)

    def _eval_call(self, expr: syn.Call, env: dict[str, _Binding]) -> TypeTerm:
        func = expr.func
        if isinstance(func, syn.Name) and func.id not in self.locals and func.id not in self.ambient:
            if func.id in BUILTIN_SIGS:
                self.loads[func.span.token_index] = Definedness.BOUND
                return self._eval_builtin_call(BUILTIN_SIGS[func.id], expr, env)
            if func.id in OPAQUE_BUILTINS:
                self.loads[func.span.token_index] = Definedness.BOUND
                for arg in expr.args:
                    self._eval(arg, env)
                for _, value in expr.kwargs:
                    self._eval(value, env)
                return UNKNOWN
        func_t = self._eval(func, env)
        arg_types = [self._eval(a, env) for a in expr.args]
        for _, value in expr.kwargs:
            self._eval(value, env)
        if is_unknown(func_t):
            return UNKNOWN
        members = members_of(func_t)
        callables = [m for m in members if isinstance(m, FunctionT)]
        if not callables:
            self._report(
                Category.UNSUPPORTED_OPERAND,
                expr.span,
                f"{func_t.display()} object is not callable",
            )
            return UNKNOWN
        if not expr.kwargs:
            accepted = [c for c in callables if self._call_accepts(c, arg_types)]
            if not accepted:
                self._report(
                    Category.WRONG_ARG_TYPES,
                    expr.span,
                    self._call_mismatch_message(func, callables[0], arg_types),
                )
                accepted = callables
        else:
            accepted = callables  # keyword calls are not checked against positional tables
        return union_of(*(c.ret for c in accepted))

    def _call_accepts(self, fn: FunctionT, arg_types: list[TypeTerm]) -> bool:
        if fn.params is None:
            return True
        if len(arg_types) != len(fn.params):
            return False
        return not any(
            definitely_incompatible(arg, param)
            for arg, param in zip(arg_types, fn.params)
        )

    def _call_mismatch_message(self, func: syn.Expr, fn: FunctionT,
                               arg_types: list[TypeTerm]) -> str:
        label = func.id if isinstance(func, syn.Name) else (
            func.attr if isinstance(func, syn.Attribute) else "callable"
        )
        if fn.params is not None and len(arg_types) != len(fn.params):
            return (f"{label}() takes {len(fn.params)} argument(s), "
                    f"got {len(arg_types)}")
        given = ", ".join(t.display() for t in arg_types)
        return f"wrong argument types for {label}(): ({given})"

    def _eval_builtin_call(self, sig: tables.BuiltinSig, expr: syn.Call,
                           env: dict[str, _Binding]) -> TypeTerm:
        arg_types = [self._eval(a, env) for a in expr.args]
        for _, value in expr.kwargs:
            self._eval(value, env)
        if expr.kwargs or not (sig.min_args <= len(arg_types) <= sig.max_args):
            self._report(
                Category.WRONG_ARG_TYPES,
                expr.span,
                f"{sig.name}() takes {sig.min_args}"
                + (f" to {sig.max_args}" if sig.max_args != sig.min_args else "")
                + f" argument(s), got {len(arg_types) + len(expr.kwargs)}",
            )
            return sig.result(tuple(arg_types))
        for i, arg in enumerate(arg_types):
            if is_unknown(arg):
                continue
            if not any(sig.accepts(i, m) for m in members_of(arg)):
                self._report(
                    Category.WRONG_ARG_TYPES,
                    expr.args[i].span,
                    f"wrong argument type for {sig.name}(): {arg.display()}",
                )
        return sig.result(tuple(arg_types))

    def _binop_type(self, op: str, left: TypeTerm, right: TypeTerm,
                    span: SourceSpan) -> TypeTerm:
        if is_unknown(left) or is_unknown(right):
            return UNKNOWN
        results = [
            r
            for lm in members_of(left)
            for rm in members_of(right)
            if (r := tables.binop_result(op, lm, rm)) is not None
        ]
        if not results:
            self._report(
                Category.UNSUPPORTED_OPERAND,
                span,
                f"unsupported operand type(s) for {op}: "
                f"{left.display()} and {right.display()}",
            )
            return UNKNOWN
        return union_of(*results)

    def _unary_type(self, op: str, operand: TypeTerm, span: SourceSpan) -> TypeTerm:
        if op == "not":
            return BOOL
        if is_unknown(operand):
            return UNKNOWN
        results = [
            r for m in members_of(operand)
            if (r := tables.unary_result(op, m)) is not None
        ]
        if not results:
            self._report(
                Category.UNSUPPORTED_OPERAND,
                span,
                f"unsupported operand type for unary {op}: {operand.display()}",
            )
            return UNKNOWN
        return union_of(*results)

    def _eval_compare(self, expr: syn.Compare, env: dict[str, _Binding]) -> TypeTerm:
        left_t = self._eval(expr.left, env)
        for op, comparator in zip(expr.ops, expr.comparators):
            right_t = self._eval(comparator, env)
            if op in ("==", "!=", "is", "is not"):
                pass  # always defined
            elif op in ("in", "not in"):
                if not is_unknown(left_t) and not is_unknown(right_t):
                    valid = any(
                        tables.membership_valid(lm, rm)
                        for lm in members_of(left_t)
                        for rm in members_of(right_t)
                    )
                    if not valid:
                        self._report(
                            Category.UNSUPPORTED_OPERAND,
                            expr.span,
                            f"unsupported operand type(s) for {op}: "
                            f"{left_t.display()} and {right_t.display()}",
                        )
            else:
                if not is_unknown(left_t) and not is_unknown(right_t):
                    valid = any(
                        tables.order_comparable(lm, rm)
                        for lm in members_of(left_t)
                        for rm in members_of(right_t)
                    )
                    if not valid:
                        self._report(
                            Category.UNSUPPORTED_OPERAND,
                            expr.span,
                            f"unsupported operand type(s) for {op}: "
                            f"{left_t.display()} and {right_t.display()}",
                        )
            left_t = right_t
        return BOOL

    def _iterate(self, iter_t: TypeTerm, span: SourceSpan) -> TypeTerm:
        if is_unknown(iter_t):
            return UNKNOWN
        elems = [
            e for m in members_of(iter_t)
            if (e := tables.iterable_elem(m)) is not None
        ]
        if not elems:
            self._report(
                Category.UNSUPPORTED_OPERAND,
                span,
                f"{iter_t.display()} object is not iterable",
            )
            return UNKNOWN
        return union_of(*elems)

    def _report(self, category: Category, span: SourceSpan, message: str,
                symbol: str | None = None) -> None:
        self.diags.append(Diagnostic(category, span, message, symbol))


def _merge(a: dict[str, _Binding], b: dict[str, _Binding]) -> dict[str, _Binding]:
    out: dict[str, _Binding] = {}
    for name in a.keys() | b.keys():
        da, ta = a.get(name, _ABSENT)
        db, tb = b.get(name, _ABSENT)
        defined = da if da == db else Definedness.MAYBE
        types = [t for d, t in ((da, ta), (db, tb)) if d is not Definedness.UNBOUND]
        out[name] = (defined, union_of(*types) if types else UNKNOWN)
    return out


def _inline_stub_set(item: syn.Stmt) -> StubSet:
    """Stub declaration appearing inline in the sample's preamble."""
    from typegate.typecheck.stubs import stub_set_from_items

    return stub_set_from_items([item])


def check(tree: syn.SyntaxTree, config: CheckConfig | None = None) -> list[Diagnostic]:
    """Diagnostics for one parsed sample; deterministic and source-ordered.

    Engine failures surface as a single internal-error diagnostic.
    """
    config = config or CheckConfig()
    try:
        engine = _Engine(tree, config)
        diags, _ = engine.run()
        return diags
    except Exception as exc:  # InternalCheckError, RecursionError, bugs
        span = tree.function.span if tree.function is not None else SourceSpan(1, 0, 0)
        return [
            Diagnostic(Category.INTERNAL_ERROR, span, f"internal checker error: {exc}")
        ]


def build_scopes(tree: syn.SyntaxTree) -> ScopeModel:
    """Per-load definedness under branch-meet and zero-trip loop semantics."""
    engine = _Engine(tree, CheckConfig())
    _, model = engine.run()
    return model


def expr_type(env: dict[str, TypeTerm], expression: syn.Expr) -> TypeTerm:
    """Type of an expression under the given name->type environment.

    Never raises for type errors; those surface as diagnostics in check().
    """
    shim = syn.FunctionDef(
        span=SourceSpan(1, 0, 0), end_ti=0, name="<expr>", name_span=SourceSpan(1, 0, 0),
        params=tuple(
            syn.Param(span=SourceSpan(1, 0, 0), end_ti=0, name=name, annotation=None, default=None)
            for name in env
        ),
        returns=None, body=(), is_stub=False,
    )
    tree = syn.SyntaxTree(preamble=(), function=shim, tokens=())
    engine = _Engine(tree, CheckConfig())
    bindings = {name: (Definedness.BOUND, t) for name, t in env.items()}
    return engine._eval(expression, bindings)
