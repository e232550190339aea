"""Candidate relation selection and QA/RC score fusion, per bag and dataset.

Selected relations get their classifier score fused with their QA
validation score through a weighted geometric mean; everything else,
including NA, is fused with the constant neutral score instead.  NA is
never validated: it has no question to ask.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from .core import Bag, RcPrediction, RelationSchema, StrategyI, StrategyII, ValidationConfig
from .errors import ConfigError, ParseError, ScorerError
from .ingest import Lines, build_context, dump_line, iter_lines, parse_json_line
from .samples import make_question
from .scoring import Scorer, score_to_validation


@dataclass(frozen=True, slots=True)
class UpdatedPrediction:
    """Fused per-relation scores plus which ones actually saw the QA model."""

    bag_id: str
    updated_scores: tuple[float, ...]
    validated_mask: tuple[bool, ...]

    def __post_init__(self):
        if len(self.updated_scores) != len(self.validated_mask):
            raise ValueError("updated_scores and validated_mask lengths differ")
        if any(not 0.0 <= s <= 1.0 for s in self.updated_scores):
            raise ValueError(f"bag {self.bag_id!r}: updated scores outside [0, 1]")

    @property
    def scores(self) -> tuple[float, ...]:
        """Alias so updated and raw RC predictions evaluate interchangeably."""
        return self.updated_scores


def update_validated(qa_score: float, rc_score: float, qa_weight: float) -> float:
    """Fused score ((qa^w) * rc)^(1/(w+1)): geometric mean weighted toward QA."""
    if qa_weight <= 0:
        raise ValueError(f"qa_weight must be > 0, got {qa_weight}")
    return (qa_score**qa_weight * rc_score) ** (1.0 / (qa_weight + 1.0))


def update_unvalidated(rc_score: float, neutral_score: float, qa_weight: float) -> float:
    """Fusion with the constant stand-in score for unvalidated relations."""
    if qa_weight <= 0:
        raise ValueError(f"qa_weight must be > 0, got {qa_weight}")
    return (neutral_score**qa_weight * rc_score) ** (1.0 / (qa_weight + 1.0))


def select_strategy1(
    qa_scores: Sequence[float],
    schema: RelationSchema,
    alpha_percent: float,
    beta_percent: float,
) -> set[int]:
    """Non-NA relations whose QA scores are extreme: top alpha% + bottom beta%.

    Bucket sizes are ceilings of percent * (len(schema) - 1) / 100; ties are
    broken toward the lower relation index.  The NA slot of ``qa_scores`` is
    ignored and never selected.
    """
    if alpha_percent + beta_percent > 100:
        raise ConfigError("alpha_percent + beta_percent must be <= 100")
    if len(qa_scores) != len(schema):
        raise ValueError(f"expected {len(schema)} scores, got {len(qa_scores)}")
    ranked = sorted(schema.non_na_indices(), key=lambda i: (-qa_scores[i], i))
    m = len(ranked)
    n_top = math.ceil(alpha_percent * m / 100.0)
    n_bottom = math.ceil(beta_percent * m / 100.0)
    selected = set(ranked[:n_top])
    if n_bottom:
        selected.update(ranked[-n_bottom:])
    return selected


def select_strategy2(rc_scores: Sequence[float], schema: RelationSchema, k: int) -> set[int]:
    """Top-k relations by classifier score, with NA dropped after selection.

    NA competes for the k slots but is discarded if chosen, so the result
    has k-1 members whenever NA made the cut.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(rc_scores) != len(schema):
        raise ValueError(f"expected {len(schema)} scores, got {len(rc_scores)}")
    ranked = sorted(range(len(rc_scores)), key=lambda i: (-rc_scores[i], i))
    return set(ranked[:k]) - {schema.na_index}


def validate_bag(
    bag: Bag,
    rc_pred: RcPrediction,
    scorer: Scorer,
    config: ValidationConfig,
    schema: RelationSchema,
    window: int = 40,
) -> UpdatedPrediction:
    """Select candidate relations for one bag, score them by QA, fuse.

    Strategy I asks the QA scorer about every non-NA relation and selects
    by extreme validation scores; strategy II selects by classifier scores
    and only queries the scorer for those.  A scorer failure aborts the bag
    with no partial update.
    """
    if bag.bag_id != rc_pred.bag_id:
        raise ValueError(f"bag {bag.bag_id!r} paired with prediction {rc_pred.bag_id!r}")
    if len(rc_pred.scores) != len(schema):
        raise ValueError(
            f"bag {bag.bag_id!r}: {len(rc_pred.scores)} scores vs {len(schema)} relations"
        )
    config.check_against_schema(schema)
    context = build_context(bag, window)

    def qa_validation(relation: int) -> float:
        question = make_question(bag.head, schema.labels[relation])
        try:
            return score_to_validation(scorer.score(question, context))
        except Exception as exc:
            raise ScorerError(
                f"bag {bag.bag_id!r}: scorer failed on relation "
                f"{schema.labels[relation]!r}: {exc}"
            ) from exc

    strategy = config.strategy
    if isinstance(strategy, StrategyI):
        vals = [0.0] * len(schema)
        for rel in schema.non_na_indices():
            vals[rel] = qa_validation(rel)
        selected = select_strategy1(vals, schema, strategy.alpha_percent, strategy.beta_percent)
        qa_for = {rel: vals[rel] for rel in selected}
    elif isinstance(strategy, StrategyII):
        selected = select_strategy2(rc_pred.scores, schema, strategy.k)
        qa_for = {rel: qa_validation(rel) for rel in sorted(selected)}
    else:
        raise ConfigError(f"unknown strategy {strategy!r}")

    updated = []
    mask = []
    for rel, rc_score in enumerate(rc_pred.scores):
        if rel in qa_for:
            updated.append(update_validated(qa_for[rel], rc_score, config.qa_weight))
            mask.append(True)
        else:
            updated.append(update_unvalidated(rc_score, config.neutral_score, config.qa_weight))
            mask.append(False)
    return UpdatedPrediction(
        bag_id=bag.bag_id, updated_scores=tuple(updated), validated_mask=tuple(mask)
    )


def validate_dataset(
    bags: Sequence[Bag],
    rc_preds: Mapping[str, RcPrediction],
    scorer: Scorer,
    config: ValidationConfig,
    schema: RelationSchema,
    window: int = 40,
    parallelism: int = 1,
) -> list[UpdatedPrediction]:
    """validate_bag over a bag list, preserving input order at any parallelism."""
    missing = [bag.bag_id for bag in bags if bag.bag_id not in rc_preds]
    if missing:
        raise ValueError(f"no RC prediction for bag(s): {missing[:5]}")
    config.check_against_schema(schema)

    def run(bag: Bag) -> UpdatedPrediction:
        return validate_bag(bag, rc_preds[bag.bag_id], scorer, config, schema, window)

    if parallelism <= 1 or len(bags) <= 1:
        return [run(bag) for bag in bags]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(run, bags))


def write_updated_predictions(preds: Iterable[UpdatedPrediction], out: IO[str]) -> None:
    for pred in preds:
        out.write(
            dump_line(
                {
                    "bag_id": pred.bag_id,
                    "scores": list(pred.updated_scores),
                    "validated": list(pred.validated_mask),
                }
            )
        )


def parse_updated_predictions(stream: Lines) -> list[UpdatedPrediction]:
    preds = []
    seen = set()
    for line_no, text in iter_lines(stream):
        obj = parse_json_line(line_no, text)
        try:
            bag_id = str(obj["bag_id"])
            scores = tuple(float(s) for s in obj["scores"])
            validated = tuple(bool(v) for v in obj.get("validated", [False] * len(scores)))
            pred = UpdatedPrediction(bag_id=bag_id, updated_scores=scores, validated_mask=validated)
        except KeyError as exc:
            raise ParseError(f"missing field {exc.args[0]!r}", line_no) from exc
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
        if bag_id in seen:
            raise ParseError(f"duplicate bag_id {bag_id!r}", line_no)
        seen.add(bag_id)
        preds.append(pred)
    return preds
