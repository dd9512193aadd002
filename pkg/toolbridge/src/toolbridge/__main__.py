"""CLI: serve a detector rule over stdio, or run an external checker once."""

from __future__ import annotations

import argparse
import json
import sys

from toolbridge.checkers import CheckerAdapterConfig, run_external_check, tool_version
from toolbridge.server import BUILTIN_RULES, serve_detector


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="toolbridge")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="speak detector protocol v1 on stdio")
    p.add_argument("--rule", choices=sorted(BUILTIN_RULES), default="never")

    p = sub.add_parser("check", help="run a production checker on one file")
    p.add_argument("file")
    p.add_argument("--tool", choices=("pytype", "mypy"), default="pytype")
    p.add_argument("--executable", default=None)
    p.add_argument("--stubs", default=None)
    p.add_argument("--keep-temp", action="store_true")

    args = parser.parse_args(argv)
    if args.command == "serve":
        serve_detector(BUILTIN_RULES[args.rule])
        return 0

    config = CheckerAdapterConfig(
        tool=args.tool,
        executable=args.executable,
        keep_temp=args.keep_temp,
    )
    with open(args.file, "r", encoding="utf-8") as fh:
        source = fh.read()
    stubs = None
    if args.stubs:
        with open(args.stubs, "r", encoding="utf-8") as fh:
            stubs = fh.read()
    print(f"# {args.tool} {tool_version(config)}", file=sys.stderr)
    diagnostics = run_external_check(source, stubs, config)
    for diag in diagnostics:
        print(
            json.dumps(
                {
                    "category": diag.category,
                    "line": diag.line,
                    "column": diag.column,
                    "message": diag.message,
                    "raw_code": diag.raw_code,
                }
            )
        )
    return 1 if diagnostics else 0


if __name__ == "__main__":
    sys.exit(main())
