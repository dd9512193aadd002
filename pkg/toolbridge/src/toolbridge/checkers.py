"""Run a production type checker on one sample and translate its findings.

Supported tools: pytype (inference-based, works unannotated) and mypy
(gradual, annotation-driven). Each tool's error names map onto the closed
eight-value taxonomy; names outside the mapping become internal-error and
are logged, never invented categories.
"""

from __future__ import annotations

import logging
import re
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger("toolbridge.checkers")

TAXONOMY = (
    "name-error",
    "attribute-error",
    "unsupported-operand",
    "wrong-arg-types",
    "not-writable",
    "bad-return-type",
    "import-error",
    "internal-error",
)


class ToolMissing(RuntimeError):
    pass


class ToolCrashed(RuntimeError):
    pass


class ParseFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    category: str
    line: int
    column: int
    message: str
    raw_code: str


PYTYPE_CATEGORY_MAP: dict[str, str] = {
    "name-error": "name-error",
    "attribute-error": "attribute-error",
    "module-attr": "attribute-error",
    "unsupported-operands": "unsupported-operand",
    "not-writable": "not-writable",
    "wrong-arg-types": "wrong-arg-types",
    "wrong-arg-count": "wrong-arg-types",
    "wrong-keyword-args": "wrong-arg-types",
    "missing-parameter": "wrong-arg-types",
    "duplicate-keyword-argument": "wrong-arg-types",
    "bad-return-type": "bad-return-type",
    "import-error": "import-error",
    "not-callable": "unsupported-operand",
    "not-indexable": "unsupported-operand",
    "unsupported-operand": "unsupported-operand",  # some releases print the singular
    "pyi-error": "internal-error",
    "python-compiler-error": "internal-error",
    "recursion-error": "internal-error",
    "not-supported-yet": "internal-error",
}

MYPY_CATEGORY_MAP: dict[str, str] = {
    "name-defined": "name-error",
    "used-before-def": "name-error",
    "possibly-undefined": "name-error",
    "attr-defined": "attribute-error",
    "union-attr": "attribute-error",
    "operator": "unsupported-operand",
    "index": "unsupported-operand",
    "arg-type": "wrong-arg-types",
    "call-arg": "wrong-arg-types",
    "call-overload": "wrong-arg-types",
    "return-value": "bad-return-type",
    "return": "bad-return-type",
    "import": "import-error",
    "import-not-found": "import-error",
    "import-untyped": "import-error",
}


@dataclass
class CheckerAdapterConfig:
    tool: str  # "pytype" | "mypy"
    executable: str | None = None
    flags: tuple[str, ...] = ()
    category_map: dict[str, str] = field(default_factory=dict)
    keep_temp: bool = False
    timeout: float = 120.0

    def __post_init__(self) -> None:
        if self.tool not in ("pytype", "mypy"):
            raise ValueError(f"unknown tool {self.tool!r}")
        if self.executable is None:
            self.executable = self.tool
        if not self.category_map:
            self.category_map = dict(
                PYTYPE_CATEGORY_MAP if self.tool == "pytype" else MYPY_CATEGORY_MAP
            )


def tool_version(config: CheckerAdapterConfig) -> str:
    """`<exe> --version` output, for run manifests; tools are never pinned."""
    exe = shutil.which(config.executable)
    if exe is None:
        raise ToolMissing(f"{config.executable!r} not found on PATH")
    proc = subprocess.run(
        [exe, "--version"], capture_output=True, text=True, timeout=30
    )
    return (proc.stdout or proc.stderr).strip()


_PYTYPE_LINE = re.compile(
    r'^File "(?P<file>[^"]+)", line (?P<line>\d+)(?:, in (?P<ctx>[^:]+))?: '
    r"(?P<msg>.*) \[(?P<code>[a-zA-Z0-9-]+)\]\s*$"
)
_PYTYPE_NOISE = (
    "Computing", "Analyzing", "Adding", "Generating", "Leaving", "ninja:",
    "[", "FAILED", "Entering", "For more details", "Called from", "Success",
    "WARNING", "usage:", "pytype", "Traceback",
)

_MYPY_LINE = re.compile(
    r"^(?P<file>[^:]+):(?P<line>\d+)(?::(?P<col>\d+))?: "
    r"(?P<sev>error|warning|note): (?P<msg>.*?)(?:\s+\[(?P<code>[a-zA-Z0-9-]+)\])?\s*$"
)
_MYPY_NOISE = ("Found ", "Success", "usage:", "mypy: ")


def _map_category(code: str, message: str, config: CheckerAdapterConfig) -> str:
    if config.tool == "mypy" and code == "index" and "assignment" in message.lower():
        # indexed assignment on an immutable sequence is mypy's not-writable analog
        return "not-writable"
    mapped = config.category_map.get(code)
    if mapped is None:
        logger.warning("unmapped %s category %r; recording as internal-error", config.tool, code)
        return "internal-error"
    if mapped not in TAXONOMY:
        logger.warning("mapping for %r leaves the taxonomy (%r); using internal-error", code, mapped)
        return "internal-error"
    return mapped


def parse_pytype_output(output: str, config: CheckerAdapterConfig) -> list[Diagnostic]:
    diagnostics: list[Diagnostic] = []
    for raw in output.splitlines():
        line = raw.rstrip()
        if not line.strip():
            continue
        match = _PYTYPE_LINE.match(line)
        if match:
            code = match.group("code")
            message = match.group("msg")
            diagnostics.append(
                Diagnostic(
                    category=_map_category(code, message, config),
                    line=int(match.group("line")),
                    column=0,  # pytype reports no columns
                    message=message,
                    raw_code=code,
                )
            )
            continue
        if line.startswith("File ") and "[" in line:
            raise ParseFailure(f"unrecognized pytype diagnostic line: {line!r}")
        if line.startswith(_PYTYPE_NOISE) or line[:1].isspace() or not line[0].isalnum():
            continue
        # anything else is chatter we tolerate
    return diagnostics


def parse_mypy_output(output: str, config: CheckerAdapterConfig) -> list[Diagnostic]:
    diagnostics: list[Diagnostic] = []
    for raw in output.splitlines():
        line = raw.rstrip()
        if not line.strip() or line.startswith(_MYPY_NOISE):
            continue
        match = _MYPY_LINE.match(line)
        if match is None:
            if re.match(r"^[^:]+:\d+", line):
                raise ParseFailure(f"unrecognized mypy diagnostic line: {line!r}")
            continue
        if match.group("sev") != "error":
            continue
        code = match.group("code") or "misc"
        message = match.group("msg")
        diagnostics.append(
            Diagnostic(
                category=_map_category(code, message, config),
                line=int(match.group("line")),
                column=int(match.group("col") or 0),
                message=message,
                raw_code=code,
            )
        )
    return diagnostics


def run_external_check(
    source: str,
    stubs: str | None,
    config: CheckerAdapterConfig,
) -> list[Diagnostic]:
    """Materialize a temp module (stubs prepended), run the tool, map findings.

    Reported lines are re-based onto the sample's own line numbers; findings
    inside the prepended stub region are dropped (and logged).
    """
    exe = shutil.which(config.executable)
    if exe is None:
        raise ToolMissing(f"{config.executable!r} not found on PATH")

    prefix = ""
    if stubs:
        prefix = stubs if stubs.endswith("\n") else stubs + "\n"
    offset = prefix.count("\n")
    text = prefix + source

    tmp_dir = Path(tempfile.mkdtemp(prefix="toolbridge-"))
    module_path = tmp_dir / "sample.py"
    module_path.write_text(text, encoding="utf-8")
    try:
        argv = [exe, *config.flags, str(module_path)]
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=config.timeout,
                cwd=tmp_dir,
            )
        except subprocess.TimeoutExpired as exc:
            raise ToolCrashed(f"{config.tool} timed out after {config.timeout}s") from exc
        if proc.returncode not in (0, 1):
            raise ToolCrashed(
                f"{config.tool} exited with {proc.returncode}: {proc.stderr.strip()[:500]}"
            )
        output = proc.stdout + ("\n" + proc.stderr if config.tool == "pytype" else "")
        parser = parse_pytype_output if config.tool == "pytype" else parse_mypy_output
        raw_diagnostics = parser(output, config)
    finally:
        if not config.keep_temp:
            shutil.rmtree(tmp_dir, ignore_errors=True)
        else:
            logger.info("kept temp workspace %s", tmp_dir)

    rebased: list[Diagnostic] = []
    for diag in raw_diagnostics:
        if diag.line <= offset:
            logger.info("dropping finding inside the stub preamble: %s", diag)
            continue
        rebased.append(
            Diagnostic(
                category=diag.category,
                line=diag.line - offset,
                column=diag.column,
                message=diag.message,
                raw_code=diag.raw_code,
            )
        )
    return rebased
