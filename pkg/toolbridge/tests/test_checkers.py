from __future__ import annotations

import logging

import pytest

from toolbridge.checkers import (
    TAXONOMY,
    CheckerAdapterConfig,
    ParseFailure,
    ToolCrashed,
    ToolMissing,
    parse_mypy_output,
    parse_pytype_output,
    run_external_check,
    tool_version,
)

PYTYPE_SAMPLE_OUTPUT = """\
Computing dependencies
Analyzing 1 sources with 0 local dependencies
ninja: Entering directory `.pytype'
[1/1] check sample
FAILED: /tmp/x/.pytype/pyi/sample.pyi
File "/tmp/x/sample.py", line 8, in take_last_assignment: unsupported operand type(s) for item retrieval: first: bool and 1: int [unsupported-operands]
File "/tmp/x/sample.py", line 2: Can't find module 'requests'. [import-error]
File "/tmp/x/sample.py", line 11, in take_last_assignment: weird new failure mode [brand-new-error]
For more details, see https://google.github.io/pytype/errors.html
"""

MYPY_SAMPLE_OUTPUT = """\
sample.py:8:12: error: Value of type "bool" is not indexable  [index]
sample.py:3:5: error: Name "value" is not defined  [name-defined]
sample.py:4:1: error: Unsupported target for indexed assignment ("tuple[int, int]")  [index]
sample.py:9:5: note: Consider using an if statement
sample.py:10:2: warning: unused variable
Found 3 errors in 1 file (checked 1 source file)
"""


def test_parse_pytype_output_maps_and_logs(caplog):
    config = CheckerAdapterConfig(tool="pytype", executable="pytype")
    with caplog.at_level(logging.WARNING, logger="toolbridge.checkers"):
        diagnostics = parse_pytype_output(PYTYPE_SAMPLE_OUTPUT, config)
    assert [(d.category, d.line) for d in diagnostics] == [
        ("unsupported-operand", 8),
        ("import-error", 2),
        ("internal-error", 11),
    ]
    assert diagnostics[0].raw_code == "unsupported-operands"
    assert any("brand-new-error" in record.message for record in caplog.records)


def test_parse_mypy_output():
    config = CheckerAdapterConfig(tool="mypy", executable="mypy")
    diagnostics = parse_mypy_output(MYPY_SAMPLE_OUTPUT, config)
    assert [(d.category, d.line, d.column) for d in diagnostics] == [
        ("unsupported-operand", 8, 12),
        ("name-error", 3, 5),
        ("not-writable", 4, 1),
    ]


def test_parse_failures_on_malformed_diagnostic_lines():
    pytype_config = CheckerAdapterConfig(tool="pytype", executable="pytype")
    with pytest.raises(ParseFailure):
        parse_pytype_output('File "x.py", line eight: broken [name-error]\n', pytype_config)
    mypy_config = CheckerAdapterConfig(tool="mypy", executable="mypy")
    with pytest.raises(ParseFailure):
        parse_mypy_output("sample.py:8 error without separator\n", mypy_config)


def test_every_default_mapping_lands_in_taxonomy():
    from toolbridge.checkers import MYPY_CATEGORY_MAP, PYTYPE_CATEGORY_MAP

    assert set(PYTYPE_CATEGORY_MAP.values()) <= set(TAXONOMY)
    assert set(MYPY_CATEGORY_MAP.values()) <= set(TAXONOMY)


def test_run_external_check_with_fake_pytype(fake_pytype, listing_entry):
    config = CheckerAdapterConfig(tool="pytype", executable=fake_pytype)
    diagnostics = run_external_check(listing_entry["source"], None, config)
    assert [(d.category, d.line) for d in diagnostics] == [("unsupported-operand", 8)]


def test_run_external_check_rebases_stub_offset(fake_pytype, listing_entry):
    stubs = "def helper(x: int) -> int: ...\nclass Conn:\n    host: str\n"
    config = CheckerAdapterConfig(tool="pytype", executable=fake_pytype)
    diagnostics = run_external_check(listing_entry["source"], stubs, config)
    assert [(d.category, d.line) for d in diagnostics] == [("unsupported-operand", 8)]


def test_run_external_check_clean_sample(fake_pytype):
    config = CheckerAdapterConfig(tool="pytype", executable=fake_pytype)
    clean = "def quiet(x):\n    return x\n"
    assert run_external_check(clean, None, config) == []


def test_run_external_check_with_fake_mypy(fake_mypy, listing_entry):
    config = CheckerAdapterConfig(tool="mypy", executable=fake_mypy)
    diagnostics = run_external_check(listing_entry["source"], None, config)
    assert [(d.category, d.line) for d in diagnostics] == [("unsupported-operand", 8)]
    assert diagnostics[0].column > 0


def test_tool_missing():
    config = CheckerAdapterConfig(tool="pytype", executable="definitely-not-a-tool-xyz")
    with pytest.raises(ToolMissing):
        run_external_check("def f():\n    return 1\n", None, config)
    with pytest.raises(ToolMissing):
        tool_version(config)


def test_tool_crashed(crashing_tool):
    config = CheckerAdapterConfig(tool="pytype", executable=crashing_tool)
    with pytest.raises(ToolCrashed):
        run_external_check("def f():\n    return 1\n", None, config)


def test_tool_version_via_fake(fake_pytype):
    config = CheckerAdapterConfig(tool="pytype", executable=fake_pytype)
    assert tool_version(config) == "2024.10.11"


def test_config_validation():
    with pytest.raises(ValueError):
        CheckerAdapterConfig(tool="flake8")
    config = CheckerAdapterConfig(tool="mypy")
    assert config.executable == "mypy"
    assert config.category_map  # defaults filled in


def test_cli_check_with_fake_tool(fake_pytype, listing_entry, tmp_path, capsys):
    from toolbridge.__main__ import main

    source_path = tmp_path / "listing.py"
    source_path.write_text(listing_entry["source"], encoding="utf-8")
    code = main(
        ["check", str(source_path), "--tool", "pytype", "--executable", fake_pytype]
    )
    captured = capsys.readouterr()
    assert code == 1
    import json as json_mod

    rows = [json_mod.loads(line) for line in captured.out.strip().splitlines()]
    assert rows[0]["category"] == "unsupported-operand"
    assert rows[0]["line"] == 8
    assert "2024.10.11" in captured.err


def test_cli_check_clean_exit_zero(fake_pytype, tmp_path, capsys):
    from toolbridge.__main__ import main

    source_path = tmp_path / "clean.py"
    source_path.write_text("def quiet(x):\n    return x\n", encoding="utf-8")
    assert main(["check", str(source_path), "--executable", fake_pytype]) == 0
