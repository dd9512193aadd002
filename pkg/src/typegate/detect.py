"""Bug detectors: the checker-backed detector, a heuristic stand-in for a
neural detector, external detectors over a line-delimited JSON protocol,
and the type-checker-first cascade.

A detector maps a sample to (has_bug, location): location is present only
when has_bug is true and names a line (and token index when known).
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
from dataclasses import dataclass, replace as dc_replace
from typing import Callable, Iterable

from typegate.corpus import ProgramSample
from typegate.errors import (
    DetectorCrashed,
    DetectorTimeout,
    LexError,
    ParseError,
    ProtocolError,
    StubError,
    UnsupportedSyntax,
)
from typegate.label import dual_phase_diagnostics
from typegate.source import Usage, identifier_occurrences, parse_function, render, tokenize
from typegate.source import syntax as syn
from typegate.source.occurrences import walk_statements
from typegate.source.tokens import SourceSpan, Token, TokenKind
from typegate.typecheck import DETECTION_CATEGORIES, Category, CheckConfig

PROTOCOL_VERSION = 1

Detector = Callable[[ProgramSample], "DetectorOutcome"]


@dataclass(frozen=True)
class DetectorOutcome:
    has_bug: bool
    location: SourceSpan | None = None
    score: float | None = None
    unanalyzable: bool = False

    def __post_init__(self) -> None:
        if self.location is not None and not self.has_bug:
            raise ValueError("location present implies has_bug")


@dataclass(frozen=True)
class DetectorSpec:
    kind: str  # "typecheck" | "heuristic" | "external"
    use_annotations: bool = False
    threshold: float = 0.5
    command: tuple[str, ...] = ()
    protocol_version: int = PROTOCOL_VERSION

    def __post_init__(self) -> None:
        if self.kind not in ("typecheck", "heuristic", "external"):
            raise ValueError(f"unknown detector kind {self.kind!r}")
        if self.kind == "external" and not self.command:
            raise ValueError("external detector needs a launch command")


# -- type-checker detector ---------------------------------------------------------


def typecheck_detector(
    sample: ProgramSample,
    config: CheckConfig | None = None,
    categories: frozenset[Category] | None = None,
) -> DetectorOutcome:
    """Dual-phase check without the ground-truth line filter.

    Fires on the first (source-ordered) diagnostic in the relevant category
    set: the five unannotated categories, plus bad-return-type when
    annotations are consumed.
    """
    config = config or CheckConfig()
    if categories is None:
        categories = DETECTION_CATEGORIES | (
            {Category.BAD_RETURN_TYPE} if config.use_annotations else set()
        )
    try:
        diagnostics, _ = dual_phase_diagnostics(sample, config)
    except (LexError, ParseError, UnsupportedSyntax, StubError, RecursionError):
        return DetectorOutcome(has_bug=False, unanalyzable=True)
    hits = [d for d in diagnostics if d.category in categories]
    if not hits:
        unanalyzable = any(d.category is Category.INTERNAL_ERROR for d in diagnostics)
        return DetectorOutcome(has_bug=False, unanalyzable=unanalyzable)
    return DetectorOutcome(has_bug=True, location=hits[0].span)


# -- heuristic detector -------------------------------------------------------------


def heuristic_detector(sample: ProgramSample, threshold: float = 0.5) -> DetectorOutcome:
    """Fixed suspiciousness scoring over load occurrences.

    For a load of name n at token index i:
      rarity(n)  = 1 / (number of occurrences of n in the function)
      distance   = min |i - j| over binding occurrences j of n
                   (function token count when n is never bound)
    Each component is min-max normalized over the function's loads and the
    score is their mean, so scores live in [0, 1]. Fires when the maximum
    score reaches the threshold; location is the argmax (earliest on ties).
    """
    try:
        tree = parse_function(tokenize(sample.source))
    except (LexError, ParseError, UnsupportedSyntax):
        return DetectorOutcome(has_bug=False, unanalyzable=True)
    occurrences = identifier_occurrences(tree)
    loads = [o for o in occurrences if o.usage is Usage.LOAD]
    if not loads:
        return DetectorOutcome(has_bug=False)
    counts: dict[str, int] = {}
    bind_sites: dict[str, list[int]] = {}
    for occ in occurrences:
        counts[occ.name] = counts.get(occ.name, 0) + 1
        if occ.usage in (Usage.PARAM, Usage.STORE):
            bind_sites.setdefault(occ.name, []).append(occ.span.token_index)
    horizon = len(tree.tokens)
    rarities = []
    distances = []
    for occ in loads:
        rarities.append(1.0 / counts[occ.name])
        sites = bind_sites.get(occ.name)
        if sites:
            distances.append(min(abs(occ.span.token_index - j) for j in sites))
        else:
            distances.append(horizon)
    scores = [
        (_min_max(r, rarities) + _min_max(d, distances)) / 2.0
        for r, d in zip(rarities, distances)
    ]
    best = max(range(len(loads)), key=lambda k: (scores[k], -loads[k].span.token_index))
    best_score = scores[best]
    if best_score >= threshold:
        return DetectorOutcome(has_bug=True, location=loads[best].span, score=best_score)
    return DetectorOutcome(has_bug=False, score=best_score)


def _min_max(x: float, values: list[float]) -> float:
    lo, hi = min(values), max(values)
    if hi == lo:
        return 0.0
    return (x - lo) / (hi - lo)


# -- annotation stripping ------------------------------------------------------------


def strip_annotations(sample: ProgramSample) -> tuple[ProgramSample, dict[int, int]]:
    """Remove the function's own annotations token-wise.

    Returns the stripped sample plus a map from stripped token indices back
    to original ones. Line structure is preserved: a bare annotated
    declaration becomes `pass`. Stubs are dropped (they are annotation
    machinery). Unparsable samples pass through unchanged.
    """
    try:
        tokens = tokenize(sample.source)
        tree = parse_function(tokens)
    except (LexError, ParseError, UnsupportedSyntax):
        return dc_replace(sample, stubs=None), {}

    drop: set[int] = set()
    pass_out: dict[int, int] = {}  # first token index of a bare declaration -> last

    def annotation_range(annotation: syn.Expr) -> range:
        # scan left to the ':'/'->' marker: parenthesized annotations start
        # inside their parens, so the marker is not always adjacent
        start = annotation.span.token_index - 1
        while start > 0 and not tokens[start].is_op(":", "->"):
            start -= 1
        return range(start, annotation.end_ti + 1)

    fn = tree.function
    for param in fn.params:
        if param.annotation is not None:
            drop.update(annotation_range(param.annotation))
    if fn.returns is not None:
        drop.update(annotation_range(fn.returns))
    for stmt in walk_statements(fn.body):
        if isinstance(stmt, syn.AnnAssign):
            if stmt.value is not None:
                drop.update(annotation_range(stmt.annotation))
            else:
                pass_out[stmt.span.token_index] = stmt.annotation.end_ti

    stripped_tokens: list[Token] = []
    back_map: dict[int, int] = {}
    skip_until = -1
    for i, tok in enumerate(tokens):
        if i <= skip_until:
            continue
        if i in pass_out:
            end = pass_out[i]
            synthetic = Token(
                kind=TokenKind.KEYWORD,
                text="pass",
                span=dc_replace(tok.span, token_index=len(stripped_tokens)),
                leading=tok.leading,
            )
            back_map[len(stripped_tokens)] = i
            stripped_tokens.append(synthetic)
            skip_until = end
            continue
        if i in drop:
            continue
        back_map[len(stripped_tokens)] = i
        stripped_tokens.append(
            dc_replace(tok, span=dc_replace(tok.span, token_index=len(stripped_tokens)))
        )
    return dc_replace(sample, source=render(stripped_tokens), stubs=None), back_map


# -- external detectors ----------------------------------------------------------------


class ExternalDetector:
    """Client for the line-delimited JSON detector protocol, version 1.

    One request in flight per child; the child signals readiness with
    {"v":1,"ready":true} and answers each request in order.
    """

    def __init__(self, command: Iterable[str], timeout: float = 30.0):
        self.command = tuple(command)
        self.timeout = timeout
        self.proc: subprocess.Popen | None = None
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader: threading.Thread | None = None

    def __enter__(self) -> "ExternalDetector":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def start(self) -> None:
        self.proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        ready = self._read_frame()
        if ready.get("v") != PROTOCOL_VERSION or ready.get("ready") is not True:
            raise ProtocolError(f"bad ready frame: {ready!r}")

    def _pump(self) -> None:
        assert self.proc is not None and self.proc.stdout is not None
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _read_frame(self) -> dict:
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise DetectorTimeout(f"no response within {self.timeout}s") from None
        if line is None:
            raise DetectorCrashed("detector closed its output stream")
        try:
            frame = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"undecodable frame: {line!r}") from exc
        if not isinstance(frame, dict):
            raise ProtocolError(f"frame is not an object: {line!r}")
        return frame

    def detect(self, sample: ProgramSample) -> DetectorOutcome:
        if self.proc is None or self.proc.stdin is None:
            raise DetectorCrashed("detector not started")
        request = {
            "v": PROTOCOL_VERSION,
            "id": sample.id,
            "source": sample.source,
            "meta": {},
        }
        try:
            self.proc.stdin.write(json.dumps(request) + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise DetectorCrashed("detector stdin closed") from exc
        frame = self._read_frame()
        return self._parse_response(frame, sample)

    def _parse_response(self, frame: dict, sample: ProgramSample) -> DetectorOutcome:
        if frame.get("v") != PROTOCOL_VERSION:
            raise ProtocolError(f"bad protocol version in {frame!r}")
        if frame.get("id") != sample.id:
            raise ProtocolError(f"response id {frame.get('id')!r} != request id {sample.id!r}")
        if "error" in frame:
            raise ProtocolError(f"detector error: {frame['error']}")
        has_bug = frame.get("has_bug")
        if not isinstance(has_bug, bool):
            raise ProtocolError(f"has_bug missing or not boolean in {frame!r}")
        line = frame.get("line")
        token_index = frame.get("token_index")
        score = frame.get("score")
        if line is not None and not isinstance(line, int):
            raise ProtocolError(f"line is not an integer in {frame!r}")
        if token_index is not None and not isinstance(token_index, int):
            raise ProtocolError(f"token_index is not an integer in {frame!r}")
        if score is not None and not isinstance(score, (int, float)):
            raise ProtocolError(f"score is not numeric in {frame!r}")
        if score is not None and not 0.0 <= float(score) <= 1.0:
            raise ProtocolError(f"score outside [0, 1] in {frame!r}")
        if not has_bug:
            return DetectorOutcome(has_bug=False, score=score)
        location = resolve_location(sample.source, line, token_index)
        if location is None:
            raise ProtocolError(f"has_bug without a usable location in {frame!r}")
        return DetectorOutcome(has_bug=True, location=location, score=score)

    def close(self) -> None:
        if self.proc is None:
            return
        if self.proc.stdin is not None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()
        self.proc = None


def resolve_location(source: str, line: int | None, token_index: int | None) -> SourceSpan | None:
    """Materialize a full span from a line and/or token index."""
    if line is None and token_index is None:
        return None
    try:
        tokens = tokenize(source)
    except LexError:
        tokens = []
    if token_index is not None and 0 <= token_index < len(tokens):
        return tokens[token_index].span
    if line is None:
        return None
    for tok in tokens:
        if tok.span.line == line and tok.kind not in (
            TokenKind.NEWLINE, TokenKind.INDENT, TokenKind.DEDENT,
        ):
            return tok.span
    return SourceSpan(line=line, column=0, token_index=-1)


def external_detector(sample: ProgramSample, client: ExternalDetector) -> DetectorOutcome:
    """One protocol round trip against an already-started child."""
    return client.detect(sample)


# -- cascade ---------------------------------------------------------------------------


def cascade(typecheck_outcome_fn: Detector, inner_detector: Detector) -> Detector:
    """Type checker first; only checker-silent programs reach the inner detector.

    The inner detector sees the sample with annotations stripped; its
    locations are mapped back to original token indices (lines survive
    stripping unchanged).
    """

    def run(sample: ProgramSample) -> DetectorOutcome:
        first = typecheck_outcome_fn(sample)
        if first.has_bug:
            return first
        stripped, back_map = strip_annotations(sample)
        outcome = inner_detector(stripped)
        if outcome.location is None:
            return outcome
        loc = outcome.location
        if loc.token_index in back_map:
            try:
                original = tokenize(sample.source)[back_map[loc.token_index]]
                return dc_replace(outcome, location=original.span)
            except LexError:
                pass
        return dc_replace(
            outcome, location=SourceSpan(line=loc.line, column=loc.column, token_index=-1)
        )

    return run
