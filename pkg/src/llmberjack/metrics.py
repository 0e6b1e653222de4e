"""Evaluation metrics: preference percentages, weighted Cohen's kappa, speeds.

Percentages are reported to two decimals. The tie and B shares are rounded
half-up; the A share takes the remainder so the three always sum to exactly
100.00 (the presentation convention the reported study tables follow; it is
why a raw 50.00 can print as 49.99).

Weighted kappa uses the 3-point ordinal scale A(0) < tie(1) < B(2) with
linear weights by default (quadratic on request):

    kappa_w = 1 - sum(w * observed) / sum(w * expected)

with the expected matrix built from the raters' marginals.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .errors import DegenerateMarginals, LengthMismatch, MalformedInput, NoData

DIMENSIONS = (
    "naturalness",
    "variability",
    "engagement",
    "general",
    "length",
    "style",
    "temperament",
)

VERDICTS = ("A", "tie", "B")
_SCALE = {"A": 0, "tie": 1, "B": 2}


@dataclass(frozen=True)
class PairwiseJudgment:
    pair_id: str
    evaluator_id: str
    dimension: str
    verdict: str  # A | tie | B

    def __post_init__(self):
        if self.dimension not in DIMENSIONS:
            raise MalformedInput(f"unknown dimension {self.dimension!r}")
        if self.verdict not in VERDICTS:
            raise MalformedInput(f"unknown verdict {self.verdict!r}")


@dataclass(frozen=True)
class SessionRecord:
    annotator_id: str
    kind: str  # selection | refinement
    turns_selected: int
    duration: float  # seconds
    final_token_counts: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("selection", "refinement"):
            raise MalformedInput(f"unknown session kind {self.kind!r}")
        if self.duration <= 0:
            raise MalformedInput("session duration must be positive")
        if self.turns_selected < 0 or any(c < 0 for c in self.final_token_counts):
            raise MalformedInput("counts must be non-negative")


def _round_half_up(value: Decimal) -> Decimal:
    return value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


def preference_percentages(judgments: list[PairwiseJudgment], dimension: str) -> dict[str, float]:
    """Percentage of A / B / tie verdicts for one dimension, summing to 100."""
    relevant = [j for j in judgments if j.dimension == dimension]
    if not relevant:
        raise NoData(f"no judgments for dimension {dimension!r}")
    total = Decimal(len(relevant))
    count = {v: sum(1 for j in relevant if j.verdict == v) for v in VERDICTS}
    pct_b = _round_half_up(Decimal(count["B"]) * 100 / total)
    pct_tie = _round_half_up(Decimal(count["tie"]) * 100 / total)
    pct_a = Decimal(100) - pct_b - pct_tie if count["A"] else Decimal(0)
    return {"pct_A": float(pct_a), "pct_B": float(pct_b), "pct_tie": float(pct_tie)}


def weighted_cohen_kappa(
    rater1: list[str], rater2: list[str], weights: str = "linear"
) -> float:
    """Weighted Cohen's kappa between two aligned verdict lists.

    When both raters give the same constant verdict the expected disagreement
    is zero and kappa is defined as 1.0.
    """
    if weights not in ("linear", "quadratic"):
        raise ValueError(f"unknown weight scheme {weights!r}")
    if len(rater1) != len(rater2):
        raise LengthMismatch(f"rater lists differ in length: {len(rater1)} vs {len(rater2)}")
    if not rater1:
        raise NoData("no verdict pairs")
    for verdict in (*rater1, *rater2):
        if verdict not in _SCALE:
            raise MalformedInput(f"unknown verdict {verdict!r}")

    k = len(_SCALE)
    observed = np.zeros((k, k))
    for a, b in zip(rater1, rater2):
        observed[_SCALE[a], _SCALE[b]] += 1
    n = observed.sum()
    expected = np.outer(observed.sum(axis=1), observed.sum(axis=0)) / n

    idx = np.arange(k)
    diff = np.abs(idx[:, None] - idx[None, :])
    weight = diff if weights == "linear" else diff**2

    expected_disagreement = float((weight * expected).sum())
    if expected_disagreement == 0.0:
        if rater1 == rater2:
            return 1.0
        raise DegenerateMarginals("zero expected disagreement with differing verdicts")
    return float(1.0 - (weight * observed).sum() / expected_disagreement)


def turn_speed(records: list[SessionRecord]) -> float:
    """Turn-selection speed in turns per minute over all selection sessions."""
    relevant = [r for r in records if r.kind == "selection"]
    if not relevant:
        raise NoData("no selection sessions")
    turns = sum(r.turns_selected for r in relevant)
    minutes = sum(r.duration for r in relevant) / 60.0
    return turns / minutes


def token_speed(records: list[SessionRecord]) -> float:
    """Refinement speed in tokens per second over all refinement sessions."""
    relevant = [r for r in records if r.kind == "refinement"]
    if not relevant:
        raise NoData("no refinement sessions")
    tokens = sum(sum(r.final_token_counts) for r in relevant)
    seconds = sum(r.duration for r in relevant)
    return tokens / seconds


# --- report assembly ------------------------------------------------------------

@dataclass
class DimensionStats:
    pct_A: float
    pct_B: float
    pct_tie: float
    kappa_w: float | None = None


@dataclass
class AgreementReport:
    dimensions: dict[str, DimensionStats] = field(default_factory=dict)
    v_turn: float | None = None
    v_tokens: float | None = None


def read_judgments_csv(source: str | io.TextIOBase) -> list[PairwiseJudgment]:
    """Read judgments from CSV with header pair_id,evaluator,dimension,verdict."""
    if isinstance(source, str):
        handle: io.TextIOBase = io.StringIO(source)
    else:
        handle = source
    reader = csv.DictReader(handle)
    expected = ["pair_id", "evaluator", "dimension", "verdict"]
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != expected:
        raise MalformedInput(f"judgment CSV header must be {','.join(expected)}")
    judgments = []
    seen: set[tuple[str, str, str]] = set()
    for row in reader:
        judgment = PairwiseJudgment(
            pair_id=row["pair_id"].strip(),
            evaluator_id=row["evaluator"].strip(),
            dimension=row["dimension"].strip(),
            verdict=row["verdict"].strip(),
        )
        key = (judgment.pair_id, judgment.evaluator_id, judgment.dimension)
        if key in seen:
            raise MalformedInput(f"duplicate verdict for {key}")
        seen.add(key)
        judgments.append(judgment)
    if not judgments:
        raise NoData("judgment CSV contains no rows")
    return judgments


def read_sessions_csv(source: str | io.TextIOBase) -> list[SessionRecord]:
    """Read session records from CSV with header
    annotator,kind,turns_selected,duration_seconds,token_counts
    where token_counts is a space-separated list of integers (may be empty)."""
    if isinstance(source, str):
        handle: io.TextIOBase = io.StringIO(source)
    else:
        handle = source
    reader = csv.DictReader(handle)
    expected = ["annotator", "kind", "turns_selected", "duration_seconds", "token_counts"]
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != expected:
        raise MalformedInput(f"session CSV header must be {','.join(expected)}")
    records = []
    for row in reader:
        try:
            counts = tuple(int(c) for c in row["token_counts"].split())
            records.append(
                SessionRecord(
                    annotator_id=row["annotator"].strip(),
                    kind=row["kind"].strip(),
                    turns_selected=int(row["turns_selected"]),
                    duration=float(row["duration_seconds"]),
                    final_token_counts=counts,
                )
            )
        except ValueError as exc:
            raise MalformedInput(f"bad session row {row!r}: {exc}") from None
    if not records:
        raise NoData("session CSV contains no rows")
    return records


def _kappa_for_dimension(
    judgments: list[PairwiseJudgment], dimension: str, weights: str
) -> float | None:
    relevant = [j for j in judgments if j.dimension == dimension]
    evaluators = sorted({j.evaluator_id for j in relevant})
    if len(evaluators) != 2:
        return None
    by_eval = {
        ev: {j.pair_id: j.verdict for j in relevant if j.evaluator_id == ev} for ev in evaluators
    }
    common = sorted(set(by_eval[evaluators[0]]) & set(by_eval[evaluators[1]]))
    if not common:
        return None
    rater1 = [by_eval[evaluators[0]][p] for p in common]
    rater2 = [by_eval[evaluators[1]][p] for p in common]
    try:
        return weighted_cohen_kappa(rater1, rater2, weights)
    except DegenerateMarginals:
        return None


def build_report(
    judgments: list[PairwiseJudgment],
    sessions: list[SessionRecord] | None = None,
    weights: str = "linear",
) -> AgreementReport:
    if not judgments:
        raise NoData("no judgments")
    report = AgreementReport()
    present = [d for d in DIMENSIONS if any(j.dimension == d for j in judgments)]
    for dimension in present:
        pct = preference_percentages(judgments, dimension)
        report.dimensions[dimension] = DimensionStats(
            pct_A=pct["pct_A"],
            pct_B=pct["pct_B"],
            pct_tie=pct["pct_tie"],
            kappa_w=_kappa_for_dimension(judgments, dimension, weights),
        )
    if sessions:
        try:
            report.v_turn = turn_speed(sessions)
        except NoData:
            report.v_turn = None
        try:
            report.v_tokens = token_speed(sessions)
        except NoData:
            report.v_tokens = None
    return report


def render_report(report: AgreementReport) -> str:
    """Aligned plain-text table: one row per dimension, stable order."""
    dims = [d for d in DIMENSIONS if d in report.dimensions] + sorted(
        set(report.dimensions) - set(DIMENSIONS)
    )
    lines = [f"{'dimension':<14}{'preferred A':>13}{'preferred B':>13}{'tie':>9}{'kappa_w':>9}"]
    for d in dims:
        stats = report.dimensions[d]
        kappa = "/" if stats.kappa_w is None else f"{stats.kappa_w:.2f}"
        lines.append(
            f"{d:<14}{stats.pct_A:>13.2f}{stats.pct_B:>13.2f}{stats.pct_tie:>9.2f}{kappa:>9}"
        )
    if report.v_turn is not None:
        lines.append(f"v_turn: {report.v_turn:.2f} turns/min")
    if report.v_tokens is not None:
        lines.append(f"v_tokens: {report.v_tokens:.2f} tokens/s")
    return "\n".join(lines) + "\n"
