"""Dataset model: JSONL serialization, dedup, splits and training-set filtering.

One JSON object per line; the canonical field order is fixed so that
write(read(path)) reproduces our own files byte for byte. Provenance
(name, seed, parent corpora) lives on the in-memory Corpus and in the
CLI run manifests, never inside the JSONL itself.
"""

from __future__ import annotations

import json
import os
import random
import tempfile
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

from typegate.errors import NoReplacementPool, SchemaError, UnlabeledSample
from typegate.source.tokens import SourceSpan

LABEL_CORRECT = "correct"
LABEL_BUGGY = "buggy"

UNKNOWN_TOKEN_INDEX = -1  # line-only bug locations (real-world samples)


@dataclass(frozen=True)
class MisuseRecord:
    """Ground truth of one injected or real misuse bug."""

    location: SourceSpan
    wrong_var: str
    correct_var: str
    repair_candidates: tuple[str, ...]

    def to_obj(self) -> dict:
        ti = self.location.token_index
        return {
            "line": self.location.line,
            "token_index": None if ti == UNKNOWN_TOKEN_INDEX else ti,
            "wrong_var": self.wrong_var,
            "correct_var": self.correct_var,
            "repair_candidates": list(self.repair_candidates),
        }

    @staticmethod
    def from_obj(obj: dict) -> "MisuseRecord":
        ti = obj["token_index"]
        span = SourceSpan(
            line=int(obj["line"]),
            column=-1,  # not stored in the schema; only line/token_index matter downstream
            token_index=UNKNOWN_TOKEN_INDEX if ti is None else int(ti),
        )
        return MisuseRecord(
            location=span,
            wrong_var=obj["wrong_var"],
            correct_var=obj["correct_var"],
            repair_candidates=tuple(obj["repair_candidates"]),
        )


@dataclass(frozen=True)
class ProgramSample:
    id: str
    repo: str
    file_path: str
    function_signature: str
    source: str
    stubs: str | None = None
    label: str = LABEL_CORRECT
    bug: MisuseRecord | None = None
    type_related: bool | None = None
    matched_categories: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.label not in (LABEL_CORRECT, LABEL_BUGGY):
            raise ValueError(f"bad label {self.label!r}")
        if (self.label == LABEL_BUGGY) != (self.bug is not None):
            raise ValueError("label=buggy iff a bug record is present")

    @property
    def is_buggy(self) -> bool:
        return self.label == LABEL_BUGGY

    def dedup_key(self) -> tuple[str, str, str]:
        return (self.repo, self.file_path, self.function_signature)

    def to_obj(self) -> dict:
        return {
            "id": self.id,
            "repo": self.repo,
            "file_path": self.file_path,
            "function_signature": self.function_signature,
            "source": self.source,
            "stubs": self.stubs,
            "label": self.label,
            "bug": self.bug.to_obj() if self.bug else None,
            "type_related": self.type_related,
            "matched_categories": list(self.matched_categories)
            if self.matched_categories is not None
            else None,
        }

    @staticmethod
    def from_obj(obj: dict) -> "ProgramSample":
        return ProgramSample(
            id=obj["id"],
            repo=obj["repo"],
            file_path=obj["file_path"],
            function_signature=obj["function_signature"],
            source=obj["source"],
            stubs=obj.get("stubs"),
            label=obj["label"],
            bug=MisuseRecord.from_obj(obj["bug"]) if obj.get("bug") else None,
            type_related=obj.get("type_related"),
            matched_categories=tuple(obj["matched_categories"])
            if obj.get("matched_categories") is not None
            else None,
        )


@dataclass(frozen=True)
class CorpusHeader:
    name: str = ""
    seed: int | None = None
    parents: tuple[str, ...] = ()


@dataclass
class Corpus:
    samples: list[ProgramSample] = field(default_factory=list)
    header: CorpusHeader = field(default_factory=CorpusHeader)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def by_id(self) -> dict[str, ProgramSample]:
        return {s.id: s for s in self.samples}

    def label_counts(self) -> Counter:
        return Counter(s.label for s in self.samples)


_REQUIRED_FIELDS = ("id", "repo", "file_path", "function_signature", "source", "label")


def _parse_line(line: str, line_number: int) -> ProgramSample:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", line_number) from exc
    if not isinstance(obj, dict):
        raise SchemaError("expected a JSON object", line_number)
    for key in _REQUIRED_FIELDS:
        if key not in obj:
            raise SchemaError(f"missing field {key!r}", line_number)
    try:
        return ProgramSample.from_obj(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(str(exc), line_number) from exc


def read_jsonl(path: str | Path) -> Corpus:
    """Load a corpus; SchemaError carries the offending line number."""
    samples: list[ProgramSample] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            sample = _parse_line(line, line_number)
            if sample.id in seen:
                raise SchemaError(f"duplicate sample id {sample.id!r}", line_number)
            seen.add(sample.id)
            samples.append(sample)
    return Corpus(samples=samples)


def write_jsonl(corpus: Corpus, path: str | Path) -> None:
    """Atomic canonical write: temp file in place, then rename."""
    path = Path(path)
    payload = "".join(
        json.dumps(s.to_obj(), ensure_ascii=False, separators=(",", ":")) + "\n"
        for s in corpus.samples
    )
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def normalize_signature(source: str) -> str:
    """First def line, whitespace collapsed to single spaces."""
    for line in source.splitlines():
        stripped = line.strip()
        if stripped.startswith("def"):
            return " ".join(stripped.split())
    return ""


@dataclass
class DedupResult:
    kept: Corpus
    removed: list[ProgramSample]

    def removed_fraction(self, label: str) -> float | None:
        total = sum(1 for s in self.kept.samples if s.label == label) + sum(
            1 for s in self.removed if s.label == label
        )
        if total == 0:
            return None
        return sum(1 for s in self.removed if s.label == label) / total


def dedup(eval_corpus: Corpus, train_corpus: Corpus) -> DedupResult:
    """Drop eval samples sharing (repo, file_path, function_signature) with training."""
    train_keys = {s.dedup_key() for s in train_corpus.samples}
    kept: list[ProgramSample] = []
    removed: list[ProgramSample] = []
    for sample in eval_corpus.samples:
        (removed if sample.dedup_key() in train_keys else kept).append(sample)
    header = replace(eval_corpus.header, parents=eval_corpus.header.parents + (train_corpus.header.name,))
    return DedupResult(kept=Corpus(samples=kept, header=header), removed=removed)


def split_by_type_related(
    corpus: Corpus,
) -> tuple[list[ProgramSample], list[ProgramSample], list[ProgramSample]]:
    """(type-related bugs, other bugs, correct programs); needs labeled bugs."""
    type_related: list[ProgramSample] = []
    others: list[ProgramSample] = []
    correct: list[ProgramSample] = []
    for sample in corpus.samples:
        if not sample.is_buggy:
            correct.append(sample)
        elif sample.type_related is None:
            raise UnlabeledSample(f"sample {sample.id!r} has no type_related label")
        elif sample.type_related:
            type_related.append(sample)
        else:
            others.append(sample)
    return type_related, others, correct


def filter_train(corpus: Corpus, seed: int) -> Corpus:
    """Replace type-related bugs by oversampling other bugs, with replacement.

    Output size and per-label counts equal the input's; replacement samples get
    fresh ids "<source-id>#dupN" so provenance stays readable.
    """
    type_related, pool, _ = split_by_type_related(corpus)
    if not type_related:
        return Corpus(samples=list(corpus.samples), header=corpus.header)
    if not pool:
        raise NoReplacementPool("all buggy samples are type-related")
    rng = random.Random(f"filter-train:{seed}")
    dup_counts: Counter = Counter()
    replaced_ids = {s.id for s in type_related}
    out: list[ProgramSample] = []
    for sample in corpus.samples:
        if sample.id not in replaced_ids:
            out.append(sample)
            continue
        source = pool[rng.randrange(len(pool))]
        dup_counts[source.id] += 1
        out.append(replace(source, id=f"{source.id}#dup{dup_counts[source.id]}"))
    header = CorpusHeader(
        name=corpus.header.name or "filtered",
        seed=seed,
        parents=corpus.header.parents + (corpus.header.name,) if corpus.header.name else corpus.header.parents,
    )
    return Corpus(samples=out, header=header)


def category_histogram(corpus: Corpus) -> Counter:
    """Multiset of matched categories across labeled buggy samples."""
    histogram: Counter = Counter()
    for sample in corpus.samples:
        if sample.is_buggy and sample.matched_categories:
            histogram.update(sample.matched_categories)
    return histogram
