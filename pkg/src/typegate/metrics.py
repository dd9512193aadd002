"""Localization-aware classification metrics and F-beta analysis.

A flagged faulty program is a true positive only when its reported location
matches the ground truth (line-level by default, token-level on request);
every other flag, including a faulty program flagged at the wrong place,
is a false positive. Undefined ratios are explicit None sentinels, never
silent zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from typegate.corpus import Corpus, ProgramSample
from typegate.detect import DetectorOutcome
from typegate.errors import MissingOutcome, NoCrossover

MATCH_LINE = "line"
MATCH_TOKEN = "token"


@dataclass(frozen=True)
class EvalCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("negative count")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def merged(self, other: "EvalCounts") -> "EvalCounts":
        return EvalCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )


@dataclass(frozen=True)
class EvalReport:
    counts: EvalCounts
    precision: float | None
    recall: float | None
    f_scores: dict[float, float | None] = field(default_factory=dict)


def _location_matches(sample: ProgramSample, outcome: DetectorOutcome, match: str) -> bool:
    if sample.bug is None or outcome.location is None:
        return False
    if match == MATCH_TOKEN:
        return (
            outcome.location.token_index >= 0
            and outcome.location.token_index == sample.bug.location.token_index
        )
    return outcome.location.line == sample.bug.location.line


def classify_sample(sample: ProgramSample, outcome: DetectorOutcome, match: str = MATCH_LINE) -> str:
    """One of "tp", "fp", "fn", "tn" for a single sample."""
    if sample.is_buggy:
        if outcome.has_bug:
            return "tp" if _location_matches(sample, outcome, match) else "fp"
        return "fn"
    return "fp" if outcome.has_bug else "tn"


def tally(
    outcomes: dict[str, DetectorOutcome], corpus: Corpus, match: str = MATCH_LINE
) -> EvalCounts:
    """Counts over a corpus; raises MissingOutcome if a sample has no outcome."""
    if match not in (MATCH_LINE, MATCH_TOKEN):
        raise ValueError(f"unknown match rule {match!r}")
    buckets = {"tp": 0, "fp": 0, "fn": 0, "tn": 0}
    for sample in corpus.samples:
        if sample.id not in outcomes:
            raise MissingOutcome(f"no outcome for sample {sample.id!r}")
        buckets[classify_sample(sample, outcomes[sample.id], match)] += 1
    return EvalCounts(**buckets)


def precision_recall(counts: EvalCounts) -> tuple[float | None, float | None]:
    """Zero-denominator ratios are None, never silently zero."""
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else None
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else None
    return precision, recall


def f_beta(precision: float, recall: float, beta: float) -> float | None:
    """(1 + b^2) * P * R / (b^2 * P + R); scale-invariant in (P, R).

    Returns None when the denominator vanishes.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if precision < 0 or recall < 0:
        raise ValueError("precision/recall must be non-negative")
    b2 = beta * beta
    denominator = b2 * precision + recall
    if denominator == 0:
        return None
    return (1 + b2) * precision * recall / denominator


def ratio_change(p_a: float, p_b: float) -> float | None:
    """Signed percent change of p_b with respect to p_a; None when p_a is 0."""
    if p_a == 0:
        return None
    return (p_b - p_a) / p_a * 100.0


def evaluate(
    outcomes: dict[str, DetectorOutcome],
    corpus: Corpus,
    betas: tuple[float, ...] = (1.0, 1.5),
    match: str = MATCH_LINE,
) -> EvalReport:
    counts = tally(outcomes, corpus, match)
    precision, recall = precision_recall(counts)
    f_scores: dict[float, float | None] = {}
    for beta in betas:
        if precision is None or recall is None:
            f_scores[beta] = None
        else:
            f_scores[beta] = f_beta(precision, recall, beta)
    return EvalReport(counts=counts, precision=precision, recall=recall, f_scores=f_scores)


def crossover_beta(p1: float, r1: float, p2: float, r2: float, tol: float = 1e-12) -> float:
    """The unique beta where F-beta(p1, r1) == F-beta(p2, r2).

    Closed form: beta^2 = r1*r2*(p2 - p1) / (p1*p2*(r1 - r2)); falls back to
    bisection when the closed form is numerically degenerate. Raises
    NoCrossover when one pair dominates or the pairs coincide.
    """
    for value in (p1, r1, p2, r2):
        if value <= 0:
            raise ValueError("precision/recall values must be positive")
    if (p1 - p2) * (r1 - r2) >= 0:
        raise NoCrossover(
            "pairs must straddle: one side higher precision, the other higher recall"
        )
    numerator = r1 * r2 * (p2 - p1)
    denominator = p1 * p2 * (r1 - r2)
    if abs(denominator) > tol:
        beta_sq = numerator / denominator
        if beta_sq > 0:
            return math.sqrt(beta_sq)
    # near-degenerate: bisect g(beta) = F_beta(1) - F_beta(2)
    def gap(beta: float) -> float:
        a = f_beta(p1, r1, beta)
        b = f_beta(p2, r2, beta)
        assert a is not None and b is not None
        return a - b

    lo, hi = 1e-9, 1e9
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo == 0:
        return lo
    if g_hi == 0:
        return hi
    if g_lo * g_hi > 0:
        raise NoCrossover("no sign change over the beta range")
    for _ in range(200):
        mid = math.sqrt(lo * hi)  # geometric bisection over positive beta
        g_mid = gap(mid)
        if g_mid == 0:
            return mid
        if g_lo * g_mid < 0:
            hi = mid
        else:
            lo, g_lo = mid, g_mid
    return math.sqrt(lo * hi)


def fbeta_curve(
    pairs: list[tuple[str, float, float]], betas: list[float]
) -> list[tuple[str, float, float | None]]:
    """Rows (label, beta, score) for plotting; beta grid must ascend."""
    if any(b <= 0 for b in betas):
        raise ValueError("beta grid must be positive")
    if list(betas) != sorted(betas):
        raise ValueError("beta grid must be ascending")
    rows: list[tuple[str, float, float | None]] = []
    for label, precision, recall in pairs:
        for beta in betas:
            rows.append((label, beta, f_beta(precision, recall, beta)))
    return rows


def format_percent(value: float | None) -> str:
    """Two-decimal percentage, or the undefined sentinel."""
    if value is None:
        return "undef"
    return f"{value * 100:.2f}"


def report_csv_row(detector: str, corpus_name: str, report: EvalReport) -> str:
    counts = report.counts
    cells = [
        detector,
        corpus_name,
        str(counts.tp),
        str(counts.fp),
        str(counts.fn),
        str(counts.tn),
        format_percent(report.precision),
        format_percent(report.recall),
    ]
    for beta in sorted(report.f_scores):
        cells.append(format_percent(report.f_scores[beta]))
    return ",".join(cells)


def _beta_label(beta: float) -> str:
    return f"{beta:.1f}" if float(beta).is_integer() else f"{beta:g}"


def report_csv_header(betas: tuple[float, ...]) -> str:
    head = ["detector", "corpus", "tp", "fp", "fn", "tn", "precision", "recall"]
    head.extend(f"f{_beta_label(beta)}" for beta in sorted(betas))
    return ",".join(head)
