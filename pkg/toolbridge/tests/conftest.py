from __future__ import annotations

import json
import sys
import textwrap
from pathlib import Path

import pytest

MICRO_CORPUS_PATH = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "micro_corpus.json"


@pytest.fixture(scope="session")
def micro_corpus() -> list[dict]:
    return json.loads(MICRO_CORPUS_PATH.read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def listing_entry(micro_corpus) -> dict:
    (entry,) = [e for e in micro_corpus if e["name"] == "listing-subscript-bool"]
    return entry


# One canned finding per categorized snippet: the fake checkers locate the
# offending text in the materialized module and report its real line number,
# exactly like the production tools would.
FAKE_FINDINGS = [
    # (needle, context, pytype message, pytype code, mypy message, mypy code)
    (
        "assn[1]!=first[1]",
        "take_last_assignment",
        "unsupported operand type(s) for item retrieval: first: bool and 1: int",
        "unsupported-operands",
        'Value of type "bool" is not indexable',
        "index",
    ),
    (
        "print(value)",
        "pick_first",
        "Name 'value' is not defined",
        "name-error",
        'Name "value" is not defined',
        "name-defined",
    ),
    (
        "total.append(n)",
        "count_up",
        "No attribute 'append' on int",
        "attribute-error",
        '"int" has no attribute "append"',
        "attr-defined",
    ),
    (
        "len(n)",
        "measure",
        "Function len was called with the wrong arguments",
        "wrong-arg-types",
        'Argument 1 to "len" has incompatible type "int"',
        "arg-type",
    ),
    (
        "pair[0] = b",
        "freeze",
        "Assigning to pair[0]: tuple does not support item assignment",
        "not-writable",
        'Unsupported target for indexed assignment ("tuple[Any, Any]")',
        "index",
    ),
    (
        'return "latest"',
        "tag",
        "bad return type: expected int, got str",
        "bad-return-type",
        'Incompatible return value type (got "str", expected "int")',
        "return-value",
    ),
]


_FAKE_PYTYPE = """
import sys

FINDINGS = {findings!r}

path = sys.argv[-1]
if "--version" in sys.argv:
    print("2024.10.11")
    sys.exit(0)
with open(path, "r", encoding="utf-8") as fh:
    lines = fh.read().splitlines()
print("Computing dependencies")
print("Analyzing 1 sources with 0 local dependencies")
hits = []
for needle, ctx, message, code in FINDINGS:
    for number, text in enumerate(lines, start=1):
        if needle in text:
            hits.append((number, ctx, message, code))
for number, ctx, message, code in hits:
    print('File "%s", line %d, in %s: %s [%s]' % (path, number, ctx, message, code))
if hits:
    sys.exit(1)
print("Success: no errors found")
sys.exit(0)
"""

_FAKE_MYPY = """
import sys

FINDINGS = {findings!r}

path = sys.argv[-1]
if "--version" in sys.argv:
    print("mypy 1.11.0 (compiled: yes)")
    sys.exit(0)
with open(path, "r", encoding="utf-8") as fh:
    lines = fh.read().splitlines()
hits = []
for needle, message, code in FINDINGS:
    for number, text in enumerate(lines, start=1):
        if needle in text:
            hits.append((number, text.index(needle) + 1, message, code))
for number, col, message, code in hits:
    print("%s:%d:%d: error: %s  [%s]" % (path, number, col, message, code))
if hits:
    print("Found %d errors in 1 file (checked 1 source file)" % len(hits))
    sys.exit(1)
print("Success: no issues found in 1 source file")
sys.exit(0)
"""


def _write_tool(tmp_path: Path, name: str, body: str) -> str:
    script = tmp_path / f"{name}.py"
    script.write_text(body, encoding="utf-8")
    wrapper = tmp_path / name
    wrapper.write_text(f"#!/bin/sh\nexec {sys.executable} {script} \"$@\"\n", encoding="utf-8")
    wrapper.chmod(0o755)
    return str(wrapper)


@pytest.fixture
def fake_pytype(tmp_path) -> str:
    findings = [(n, ctx, msg, code) for n, ctx, msg, code, _, _ in FAKE_FINDINGS]
    return _write_tool(tmp_path, "fake-pytype", _FAKE_PYTYPE.format(findings=findings))


@pytest.fixture
def fake_mypy(tmp_path) -> str:
    findings = [(n, msg, code) for n, _, _, _, msg, code in FAKE_FINDINGS]
    return _write_tool(tmp_path, "fake-mypy", _FAKE_MYPY.format(findings=findings))


@pytest.fixture
def crashing_tool(tmp_path) -> str:
    body = "import sys\nprint('boom', file=sys.stderr)\nsys.exit(3)\n"
    return _write_tool(tmp_path, "crashy", body)
