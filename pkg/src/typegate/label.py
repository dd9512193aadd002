"""Dual-phase type-related-bug labeling.

Phase 1 checks the sample as-is and collects undefined names that behave
like missing packages (used only as attribute or call roots, never bound);
those become ambient Unknown bindings, the analog of prepending imports.
Phase 2 re-checks, drops import-error/internal-error findings, and keeps
only diagnostics on the bug's line.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from typegate.corpus import ProgramSample
from typegate.errors import LexError, ParseError, StubError, UnsupportedSyntax
from typegate.source import parse_function, tokenize
from typegate.source import syntax as syn
from typegate.source.occurrences import statement_exprs, walk_expr, walk_statements
from typegate.typecheck import (
    Category,
    CheckConfig,
    Diagnostic,
    check,
    collect_local_names,
    merge_stub_sets,
    parse_stub_set,
)

_DROPPED = (Category.IMPORT_ERROR, Category.INTERNAL_ERROR)


@dataclass(frozen=True)
class LabelResult:
    type_related: bool
    matched_categories: tuple[str, ...]
    all_diagnostics: tuple[Diagnostic, ...]
    phase1_missing_names: tuple[str, ...]
    unanalyzable: bool = False

    @staticmethod
    def for_unanalyzable() -> "LabelResult":
        return LabelResult(
            type_related=False,
            matched_categories=(),
            all_diagnostics=(),
            phase1_missing_names=(),
            unanalyzable=True,
        )


def _attr_or_call_root_only_names(tree: syn.SyntaxTree) -> frozenset[str]:
    """Unbound names whose every load is the base of an attribute access or a call."""
    local_names, _ = collect_local_names(tree.function)
    load_sites: dict[str, set[int]] = {}
    root_sites: dict[str, set[int]] = {}
    for stmt in walk_statements(tree.function.body):
        for top in statement_exprs(stmt):
            for node in walk_expr(top):
                if isinstance(node, syn.Name) and node.ctx is syn.Usage.LOAD:
                    load_sites.setdefault(node.id, set()).add(node.span.token_index)
                if isinstance(node, syn.Attribute) and isinstance(node.value, syn.Name):
                    root_sites.setdefault(node.value.id, set()).add(node.value.span.token_index)
                if isinstance(node, syn.Call) and isinstance(node.func, syn.Name):
                    root_sites.setdefault(node.func.id, set()).add(node.func.span.token_index)
    qualifying = {
        name
        for name, loads in load_sites.items()
        if name not in local_names and loads and loads == root_sites.get(name, set())
    }
    return frozenset(qualifying)


def _config_with_sample_stubs(sample: ProgramSample, config: CheckConfig) -> CheckConfig:
    if not sample.stubs:
        return config
    stub_set = parse_stub_set(sample.stubs)
    return replace(config, ambient_stubs=merge_stub_sets(config.ambient_stubs, stub_set))


def dual_phase_diagnostics(
    sample: ProgramSample, config: CheckConfig
) -> tuple[tuple[Diagnostic, ...], tuple[str, ...]]:
    """(phase-2 diagnostics, synthesized missing names). Raises on unparsable input."""
    tree = parse_function(tokenize(sample.source))
    cfg = _config_with_sample_stubs(sample, config)
    phase1 = check(tree, cfg)
    roots = _attr_or_call_root_only_names(tree)
    missing = sorted(
        {d.symbol for d in phase1 if d.category is Category.NAME_ERROR and d.symbol in roots}
    )
    if missing:
        cfg = replace(cfg, assumed_names=cfg.assumed_names | frozenset(missing))
        phase2 = check(tree, cfg)
    else:
        phase2 = phase1
    return tuple(phase2), tuple(missing)


def label_sample(sample: ProgramSample, config: CheckConfig | None = None) -> LabelResult:
    """Is the recorded bug visible to the checker on its own line?"""
    if sample.bug is None:
        raise ValueError(f"sample {sample.id!r} has no bug record to label")
    config = config or CheckConfig()
    try:
        diagnostics, missing = dual_phase_diagnostics(sample, config)
    except (LexError, ParseError, UnsupportedSyntax, StubError, RecursionError):
        return LabelResult.for_unanalyzable()
    unanalyzable = any(d.category is Category.INTERNAL_ERROR for d in diagnostics)
    post = [d for d in diagnostics if d.category not in _DROPPED]
    bug_line = sample.bug.location.line
    matched = [d for d in post if d.span.line == bug_line]
    return LabelResult(
        type_related=bool(matched),
        matched_categories=tuple(d.category.value for d in matched),
        all_diagnostics=diagnostics,
        phase1_missing_names=missing,
        unanalyzable=unanalyzable,
    )


def flag_correct_program(
    sample: ProgramSample,
    config: CheckConfig | None = None,
    faulty_category_set: frozenset[Category] | set[Category] = frozenset(),
) -> bool:
    """Would the checker flag this correct program with a category seen on bugs?"""
    config = config or CheckConfig()
    try:
        diagnostics, _ = dual_phase_diagnostics(sample, config)
    except (LexError, ParseError, UnsupportedSyntax, StubError, RecursionError):
        return False
    return any(
        d.category in faulty_category_set
        for d in diagnostics
        if d.category not in _DROPPED
    )


def apply_labels(sample: ProgramSample, result: LabelResult) -> ProgramSample:
    """Copy of the sample carrying the label fields for serialization."""
    return replace(
        sample,
        type_related=result.type_related,
        matched_categories=result.matched_categories,
    )
