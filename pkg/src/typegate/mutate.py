"""Variable-misuse injection: replace one load with another in-scope name.

Site and replacement are drawn uniformly by an RNG keyed on
(global seed, sample id), so corpus-wide generation is deterministic
regardless of scheduling. The edit is a single identifier token; the
rest of the source is reproduced byte for byte.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace as dc_replace

from typegate.corpus import LABEL_BUGGY, MisuseRecord, ProgramSample
from typegate.errors import NoSiteError
from typegate.source import (
    IdentifierOccurrence,
    SyntaxTree,
    Usage,
    identifier_occurrences,
    parse_function,
    render,
    tokenize,
)


@dataclass(frozen=True)
class InjectionSite:
    occurrence: IdentifierOccurrence
    candidates: tuple[str, ...]  # every other local name, first-appearance order


def _bound_local_names(tree: SyntaxTree) -> list[str]:
    """Params and stored names in order of first appearance."""
    ordered: list[str] = []
    for occ in identifier_occurrences(tree):
        if occ.usage in (Usage.PARAM, Usage.STORE) and occ.name not in ordered:
            ordered.append(occ.name)
    return ordered


def injection_sites(tree: SyntaxTree) -> list[InjectionSite]:
    """Load occurrences of local names that have at least one alternative."""
    bound = _bound_local_names(tree)
    if len(bound) < 2:
        return []
    bound_set = set(bound)
    sites: list[InjectionSite] = []
    for occ in identifier_occurrences(tree):
        if occ.usage is not Usage.LOAD or occ.name not in bound_set:
            continue
        candidates = tuple(name for name in bound if name != occ.name)
        sites.append(InjectionSite(occurrence=occ, candidates=candidates))
    return sites


def misuse_rng(seed: int, sample_id: str) -> random.Random:
    """Splittable per-sample stream: str seeding hashes via sha512, stable across runs."""
    return random.Random(f"{seed}:{sample_id}")


def apply_replacement(source: str, token_index: int, new_name: str) -> str:
    """Swap one identifier token's text; everything else byte-identical."""
    tokens = tokenize(source)
    target = tokens[token_index]
    patched = list(tokens)
    patched[token_index] = dc_replace(target, text=new_name)
    return render(patched)


def inject_misuse(sample: ProgramSample, seed: int) -> ProgramSample:
    """One uniformly drawn site, one uniformly drawn wrong variable.

    Raises NoSiteError when the function has no eligible load occurrence.
    """
    tree = parse_function(tokenize(sample.source))
    sites = injection_sites(tree)
    if not sites:
        raise NoSiteError(f"sample {sample.id!r} has no injection site")
    rng = misuse_rng(seed, sample.id)
    site = sites[rng.randrange(len(sites))]
    wrong = site.candidates[rng.randrange(len(site.candidates))]
    correct = site.occurrence.name
    bound = _bound_local_names(tree)
    record = MisuseRecord(
        location=site.occurrence.span,
        wrong_var=wrong,
        correct_var=correct,
        repair_candidates=tuple(name for name in bound if name != wrong),
    )
    mutated = apply_replacement(sample.source, site.occurrence.span.token_index, wrong)
    return dc_replace(
        sample,
        source=mutated,
        label=LABEL_BUGGY,
        bug=record,
        type_related=None,
        matched_categories=None,
    )


def revert_misuse(sample: ProgramSample) -> str:
    """Substitute correct_var back at the recorded location."""
    if sample.bug is None:
        raise ValueError("sample has no bug record")
    return apply_replacement(
        sample.source, sample.bug.location.token_index, sample.bug.correct_var
    )
