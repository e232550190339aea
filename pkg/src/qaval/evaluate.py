"""Held-out evaluation over relational facts: PR curves, AUC, Precision@N.

A "fact prediction" is one (bag, non-NA relation) pair with its score;
predictions from every bag are pooled and ranked globally, then compared
against the gold fact set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Mapping, Sequence

from .core import Bag, RelationSchema
from .errors import EvalError


@dataclass(frozen=True, slots=True)
class FactPrediction:
    """One scored (bag, relation) candidate fact and whether gold confirms it."""

    bag_id: str
    relation_index: int
    score: float
    is_correct: bool


@dataclass(frozen=True, slots=True)
class PrCurve:
    """Precision/recall points along the global fact ranking, plus the area."""

    points: tuple[tuple[float, float], ...]
    auc: float


@dataclass(frozen=True, slots=True)
class MetricsReport:
    """Summary metrics for one prediction file on one test set."""

    auc: float
    p_at: Mapping[int, float]
    n_predictions: int
    n_gold: int

    def to_obj(self) -> dict:
        return {
            "auc": self.auc,
            "p_at": {str(n): v for n, v in sorted(self.p_at.items())},
            "n_predictions": self.n_predictions,
            "n_gold": self.n_gold,
        }


@dataclass(frozen=True, slots=True)
class DeltaReport:
    """Per-metric before/after differences between two reports."""

    auc_before: float
    auc_after: float
    auc_delta: float
    p_at_delta: Mapping[int, float]
    improved: Mapping[str, bool]

    def to_obj(self) -> dict:
        return {
            "auc_before": self.auc_before,
            "auc_after": self.auc_after,
            "auc_delta": self.auc_delta,
            "p_at_delta": {str(n): v for n, v in sorted(self.p_at_delta.items())},
            "improved": dict(self.improved),
        }


def collect_fact_predictions(predictions, bags: Sequence[Bag], schema: RelationSchema) -> list[FactPrediction]:
    """Pool every (bag, non-NA relation) score and rank globally.

    Ordered by score descending, ties by (bag_id, relation_index).  Every
    prediction's bag must carry gold labels (an all-NA gold set is fine; an
    empty one is not evaluable).
    """
    by_id = {bag.bag_id: bag for bag in bags}
    facts = []
    for pred in predictions:
        bag = by_id.get(pred.bag_id)
        if bag is None:
            raise EvalError(f"prediction for unknown bag {pred.bag_id!r}")
        if not bag.true_relations:
            raise EvalError(f"bag {bag.bag_id!r} has no gold labels; cannot evaluate")
        for rel in schema.non_na_indices():
            facts.append(
                FactPrediction(
                    bag_id=pred.bag_id,
                    relation_index=rel,
                    score=pred.scores[rel],
                    is_correct=rel in bag.true_relations,
                )
            )
    facts.sort(key=lambda f: (-f.score, f.bag_id, f.relation_index))
    return facts


def count_gold_facts(bags: Sequence[Bag], schema: RelationSchema) -> int:
    """Distinct (bag, non-NA relation) gold facts in the test set."""
    return sum(len(bag.true_relations - {schema.na_index}) for bag in bags)


def pr_curve(facts: Sequence[FactPrediction], total_gold: int) -> PrCurve:
    """Precision/recall after each ranked prediction, with trapezoidal area.

    The area integrates the curve prefixed with (recall 0, precision@1), so
    a ranking that is correct from the start earns area 1.
    """
    if not facts:
        raise EvalError("cannot build a PR curve from zero predictions")
    if total_gold < 1:
        raise EvalError(f"total_gold must be >= 1, got {total_gold}")
    points = []
    tp = 0
    for i, fact in enumerate(facts, start=1):
        tp += fact.is_correct
        points.append((tp / total_gold, tp / i))
    auc = 0.0
    prev_r, prev_p = 0.0, points[0][1]
    for r, p in points:
        auc += (r - prev_r) * (p + prev_p) / 2.0
        prev_r, prev_p = r, p
    return PrCurve(points=tuple(points), auc=auc)


def precision_at_n(facts: Sequence[FactPrediction], n: int) -> float:
    """Fraction correct among the first min(n, len) ranked predictions."""
    if n < 1:
        raise EvalError(f"n must be >= 1, got {n}")
    if not facts:
        raise EvalError("cannot compute precision over zero predictions")
    top = facts[: min(n, len(facts))]
    return sum(f.is_correct for f in top) / len(top)


def metrics_report(
    facts: Sequence[FactPrediction], total_gold: int, p_at_ns: Sequence[int] = (100, 200, 300)
) -> MetricsReport:
    curve = pr_curve(facts, total_gold)
    return MetricsReport(
        auc=curve.auc,
        p_at={n: precision_at_n(facts, n) for n in p_at_ns},
        n_predictions=len(facts),
        n_gold=total_gold,
    )


def compare_reports(before: MetricsReport, after: MetricsReport) -> DeltaReport:
    """Per-metric deltas between two runs over the same test set."""
    if before.n_predictions != after.n_predictions or before.n_gold != after.n_gold:
        raise EvalError(
            "reports cover different test sets: "
            f"{before.n_predictions}/{before.n_gold} vs {after.n_predictions}/{after.n_gold}"
        )
    shared_ns = sorted(set(before.p_at) & set(after.p_at))
    p_at_delta = {n: after.p_at[n] - before.p_at[n] for n in shared_ns}
    improved = {"auc": after.auc > before.auc}
    for n in shared_ns:
        improved[f"p_at_{n}"] = p_at_delta[n] > 0
    return DeltaReport(
        auc_before=before.auc,
        auc_after=after.auc,
        auc_delta=after.auc - before.auc,
        p_at_delta=p_at_delta,
        improved=improved,
    )


def write_pr_curve(curve: PrCurve, out: IO[str]) -> None:
    """Two-column text: "recall precision" per ranked prediction."""
    for recall, precision in curve.points:
        out.write(f"{recall:.6f} {precision:.6f}\n")


def report_to_json(report: MetricsReport) -> str:
    return json.dumps(report.to_obj(), indent=2, sort_keys=False) + "\n"


def parse_metrics_report(text: str) -> MetricsReport:
    obj = json.loads(text)
    return MetricsReport(
        auc=float(obj["auc"]),
        p_at={int(k): float(v) for k, v in obj["p_at"].items()},
        n_predictions=int(obj["n_predictions"]),
        n_gold=int(obj["n_gold"]),
    )
