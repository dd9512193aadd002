"""Detector server: line-delimited JSON over stdio, protocol version 1.

Startup emits {"v":1,"ready":true}; each request gets exactly one response,
in order. Malformed requests get an error frame and the loop continues; a
closed input stream shuts the server down cleanly.
"""

from __future__ import annotations

import json
import sys
from typing import Callable, TextIO

PROTOCOL_VERSION = 1

DetectRule = Callable[[str, dict], dict]
"""(source, meta) -> {"has_bug": bool, "line": int|None,
"token_index": int|None, "score": float|None}"""


def _frame(payload: dict, out: TextIO) -> None:
    out.write(json.dumps(payload) + "\n")
    out.flush()


def _error_frame(request_id, message: str, out: TextIO) -> None:
    _frame({"v": PROTOCOL_VERSION, "id": request_id, "error": message}, out)


def serve_detector(
    rule: DetectRule,
    stdin: TextIO | None = None,
    stdout: TextIO | None = None,
) -> int:
    """Serve until EOF; returns the number of requests answered."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    _frame({"v": PROTOCOL_VERSION, "ready": True}, stdout)
    answered = 0
    for raw in stdin:
        line = raw.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            _error_frame(None, "undecodable request frame", stdout)
            continue
        if not isinstance(request, dict):
            _error_frame(None, "request frame is not an object", stdout)
            continue
        request_id = request.get("id")
        if request.get("v") != PROTOCOL_VERSION:
            _error_frame(request_id, "unsupported protocol version", stdout)
            continue
        source = request.get("source")
        if not isinstance(request_id, str) or not isinstance(source, str):
            _error_frame(request_id, "request needs string id and source", stdout)
            continue
        meta = request.get("meta") if isinstance(request.get("meta"), dict) else {}
        try:
            verdict = rule(source, meta)
        except Exception as exc:  # a broken rule must not kill the server
            _error_frame(request_id, f"rule failed: {exc}", stdout)
            continue
        has_bug = bool(verdict.get("has_bug", False))
        response = {
            "v": PROTOCOL_VERSION,
            "id": request_id,
            "has_bug": has_bug,
            "line": verdict.get("line") if has_bug else None,
            "token_index": verdict.get("token_index") if has_bug else None,
            "score": verdict.get("score"),
        }
        _frame(response, stdout)
        answered += 1
    return answered


# -- built-in rules -----------------------------------------------------------


def rule_never(source: str, meta: dict) -> dict:
    return {"has_bug": False, "score": 0.0}


def rule_first_line(source: str, meta: dict) -> dict:
    """Fires on every sample at its first non-empty line; a cheap smoke rule."""
    for number, text in enumerate(source.splitlines(), start=1):
        if text.strip():
            return {"has_bug": True, "line": number, "token_index": None, "score": 1.0}
    return {"has_bug": False, "score": 0.0}


def rule_parity(source: str, meta: dict) -> dict:
    """Deterministic pseudo-detector: fires iff the source length is odd."""
    if len(source) % 2:
        return {"has_bug": True, "line": 1, "token_index": 0, "score": 0.5}
    return {"has_bug": False, "score": 0.5}


BUILTIN_RULES: dict[str, DetectRule] = {
    "never": rule_never,
    "first-line": rule_first_line,
    "parity": rule_parity,
}
