from __future__ import annotations

import json
from pathlib import Path

import pytest

from typegate.corpus import Corpus, ProgramSample

FIXTURES = Path(__file__).parent / "fixtures"

LISTING_BUGGY = """def take_last_assignment(source):
    first=True
    last=None
    for assn in source:
        if first:
            last=assn
            first=False
        if (assn[1]!=first[1]):
            (yield last)
        last=assn
    if (last is not None):
        (yield last)
"""

LISTING_CORRECT = LISTING_BUGGY.replace("assn[1]!=first[1]", "assn[1]!=last[1]")

LISTING_BUG_LINE = 8


def make_sample(
    sample_id: str,
    source: str,
    *,
    repo: str = "repo/a",
    file_path: str = "pkg/mod.py",
    stubs: str | None = None,
    label: str = "correct",
    bug=None,
    type_related=None,
    matched_categories=None,
) -> ProgramSample:
    from typegate.corpus import normalize_signature

    return ProgramSample(
        id=sample_id,
        repo=repo,
        file_path=file_path,
        function_signature=normalize_signature(source),
        source=source,
        stubs=stubs,
        label=label,
        bug=bug,
        type_related=type_related,
        matched_categories=matched_categories,
    )


# Twenty self-contained correct functions: at least two locals each, a mix of
# concretely typed and opaque values so injected misuses split between
# checker-visible and checker-invisible.
BASE_FUNCTIONS: list[tuple[str, str]] = [
    ("take-last", LISTING_CORRECT),
    ("join-words", "def join_words(words, sep):\n    text = \"\"\n    for word in words:\n        if text:\n            text = text + sep\n        text = text + word\n    return text\n"),
    ("sum-pairs", "def sum_pairs(pairs):\n    total = 0\n    count = 0\n    for left, right in pairs:\n        total = total + left\n        count = count + 1\n    return (total, count)\n"),
    ("find-max", "def find_max(values, floor):\n    best = floor\n    for value in values:\n        if value > best:\n            best = value\n    return best\n"),
    ("bucket", "def bucket(items, size):\n    groups = []\n    current = []\n    for item in items:\n        current.append(item)\n        if len(current) >= size:\n            groups.append(current)\n            current = []\n    if current:\n        groups.append(current)\n    return groups\n"),
    ("flag-count", "def flag_count(flags):\n    active = 0\n    seen = 0\n    for flag in flags:\n        seen = seen + 1\n        if flag:\n            active = active + 1\n    return (active, seen)\n"),
    ("index-of", "def index_of(values, needle):\n    position = 0\n    for value in values:\n        if value == needle:\n            return position\n        position = position + 1\n    return -1\n"),
    ("normalize", "def normalize(text, fill):\n    trimmed = text.strip()\n    if not trimmed:\n        return fill\n    return trimmed.lower()\n"),
    ("merge-dicts", "def merge_dicts(first, second):\n    merged = {}\n    for key in first:\n        merged[key] = first[key]\n    for key in second:\n        merged[key] = second[key]\n    return merged\n"),
    ("running-mean", "def running_mean(samples):\n    total = 0.0\n    count = 0\n    means = []\n    for sample in samples:\n        total = total + sample\n        count = count + 1\n        means.append(total / count)\n    return means\n"),
    ("clip", "def clip(value, lo, hi):\n    result = value\n    if result < lo:\n        result = lo\n    if result > hi:\n        result = hi\n    return result\n"),
    ("star-line", "def star_line(width, char):\n    line = char * width\n    border = \"+\" + line + \"+\"\n    return border\n"),
    ("last-two", "def last_two(items, fallback):\n    if len(items) < 2:\n        return fallback\n    tail = items[-2:]\n    return tail\n"),
    ("count-true", "def count_true(checks, labels):\n    names = []\n    index = 0\n    for check in checks:\n        if check:\n            names.append(labels[index])\n        index = index + 1\n    return names\n"),
    ("repeat-each", "def repeat_each(values, times):\n    out = []\n    for value in values:\n        copies = 0\n        while copies < times:\n            out.append(value)\n            copies = copies + 1\n    return out\n"),
    ("strip-prefix", "def strip_prefix(name, prefix):\n    if name.startswith(prefix):\n        shorter = name[len(prefix):]\n        return shorter\n    return name\n"),
    ("pair-up", "def pair_up(keys, values):\n    pairs = []\n    index = 0\n    for key in keys:\n        pairs.append((key, values[index]))\n        index = index + 1\n    return pairs\n"),
    ("accumulate", "def accumulate(deltas, start):\n    level = start\n    history = [level]\n    for delta in deltas:\n        level = level + delta\n        history.append(level)\n    return history\n"),
    ("scores", "def scores(entries, passing):\n    passed = []\n    failed = []\n    for entry in entries:\n        if entry >= passing:\n            passed.append(entry)\n        else:\n            failed.append(entry)\n    return (passed, failed)\n"),
    ("wrap-text", "def wrap_text(body, width):\n    lines = []\n    cursor = 0\n    while cursor < len(body):\n        piece = body[cursor:cursor + width]\n        lines.append(piece)\n        cursor = cursor + width\n    return lines\n"),
]


def base_corpus() -> Corpus:
    samples = [
        make_sample(f"base-{name}", source, repo=f"repo/{i % 4}", file_path=f"src/{name}.py")
        for i, (name, source) in enumerate(BASE_FUNCTIONS)
    ]
    return Corpus(samples=samples)


@pytest.fixture
def mini_corpus() -> Corpus:
    return base_corpus()


@pytest.fixture(scope="session")
def micro_corpus() -> list[dict]:
    return json.loads((FIXTURES / "micro_corpus.json").read_text(encoding="utf-8"))


@pytest.fixture
def listing_buggy_sample() -> ProgramSample:
    from typegate.corpus import MisuseRecord
    from typegate.source import tokenize
    from typegate.source.tokens import TokenKind

    tokens = tokenize(LISTING_BUGGY)
    (bug_token,) = [
        t
        for t in tokens
        if t.span.line == LISTING_BUG_LINE and t.kind is TokenKind.IDENTIFIER and t.text == "first"
    ]
    record = MisuseRecord(
        location=bug_token.span,
        wrong_var="first",
        correct_var="last",
        repair_candidates=("source", "last", "assn"),
    )
    return make_sample("listing-1", LISTING_BUGGY, label="buggy", bug=record)
