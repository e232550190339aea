"""Core domain types: relation schemas, entity-pair bags, predictions, config.

Everything here is immutable after construction and safe to share across
worker threads.  Relations are referenced by integer index into the schema;
label strings appear only at I/O boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

from .errors import ConfigError, SchemaError


@dataclass(frozen=True, slots=True)
class RelationSchema:
    """Ordered relation label set with a designated no-relation ("NA") slot."""

    labels: tuple[str, ...]
    na_index: int

    def __post_init__(self):
        if len(self.labels) < 2:
            raise SchemaError("schema needs at least 2 labels (NA plus one relation)")
        if len(set(self.labels)) != len(self.labels):
            dupes = sorted({l for l in self.labels if self.labels.count(l) > 1})
            raise SchemaError(f"duplicate labels: {dupes}")
        if any(not l for l in self.labels):
            raise SchemaError("labels must be non-empty strings")
        if not 0 <= self.na_index < len(self.labels):
            raise SchemaError(f"na_index {self.na_index} out of range for {len(self.labels)} labels")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def na_label(self) -> str:
        return self.labels[self.na_index]

    def non_na_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.labels)) if i != self.na_index)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise SchemaError(f"unknown relation label {label!r}") from None


def schema_from_labels(labels: Sequence[str], na_label: str) -> RelationSchema:
    """Build a schema from an ordered label list, pointing na_index at na_label."""
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        dupes = sorted({l for l in labels if labels.count(l) > 1})
        raise SchemaError(f"duplicate labels: {dupes}")
    if na_label not in labels:
        raise SchemaError(f"NA label {na_label!r} not present in labels")
    return RelationSchema(labels=labels, na_index=labels.index(na_label))


@dataclass(frozen=True, slots=True)
class Mention:
    """Token span [token_start, token_end) of one entity occurrence in one sentence."""

    sentence_index: int
    token_start: int
    token_end: int

    def __post_init__(self):
        if self.sentence_index < 0:
            raise ValueError(f"sentence_index must be >= 0, got {self.sentence_index}")
        if not 0 <= self.token_start < self.token_end:
            raise ValueError(
                f"need 0 <= token_start < token_end, got [{self.token_start}, {self.token_end})"
            )


@dataclass(frozen=True, slots=True)
class Bag:
    """All context sentences for one (head, tail) entity pair.

    ``true_relations`` holds gold relation indices; it may be empty at
    inference time, and is ``{na_index}`` for pairs whose only label is NA.
    """

    bag_id: str
    head: str
    tail: str
    sentences: tuple[tuple[str, ...], ...]
    head_mentions: tuple[Mention, ...]
    tail_mentions: tuple[Mention, ...]
    true_relations: frozenset[int] = frozenset()

    def __post_init__(self):
        if not self.bag_id:
            raise ValueError("bag_id must be non-empty")
        if not self.sentences:
            raise ValueError(f"bag {self.bag_id!r} has no sentences")
        for role, mentions in (("head", self.head_mentions), ("tail", self.tail_mentions)):
            for m in mentions:
                if m.sentence_index >= len(self.sentences):
                    raise ValueError(
                        f"bag {self.bag_id!r}: {role} mention sentence {m.sentence_index} "
                        f"out of range ({len(self.sentences)} sentences)"
                    )
                if m.token_end > len(self.sentences[m.sentence_index]):
                    raise ValueError(
                        f"bag {self.bag_id!r}: {role} mention [{m.token_start}, {m.token_end}) "
                        f"exceeds sentence {m.sentence_index} length "
                        f"{len(self.sentences[m.sentence_index])}"
                    )

    def mentions_in_sentence(self, sentence_index: int) -> tuple[tuple[Mention, ...], tuple[Mention, ...]]:
        """(head mentions, tail mentions) of one sentence, in input order."""
        heads = tuple(m for m in self.head_mentions if m.sentence_index == sentence_index)
        tails = tuple(m for m in self.tail_mentions if m.sentence_index == sentence_index)
        return heads, tails


@dataclass(frozen=True, slots=True)
class RcPrediction:
    """Per-bag score vector over the relation schema, from an external classifier.

    Scores live in [0, 1] but are not required to sum to 1; fused scores
    after validation do not either.
    """

    bag_id: str
    scores: tuple[float, ...]

    def __post_init__(self):
        for i, s in enumerate(self.scores):
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"bag {self.bag_id!r}: score[{i}]={s} outside [0, 1]")


@dataclass(frozen=True, slots=True)
class StrategyI:
    """Select relations whose QA validation scores are extreme (top/bottom percent)."""

    alpha_percent: float = 10.0
    beta_percent: float = 20.0

    def __post_init__(self):
        if self.alpha_percent < 0 or self.beta_percent < 0:
            raise ConfigError("alpha_percent and beta_percent must be >= 0")
        if self.alpha_percent + self.beta_percent > 100:
            raise ConfigError(
                f"alpha_percent + beta_percent must be <= 100, "
                f"got {self.alpha_percent} + {self.beta_percent}"
            )


@dataclass(frozen=True, slots=True)
class StrategyII:
    """Select the k relations the relation classifier scored highest."""

    k: int = 3

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")


Strategy = Union[StrategyI, StrategyII]


@dataclass(frozen=True, slots=True)
class ValidationConfig:
    """Fusion parameters shared by both selection strategies.

    ``qa_weight`` (the CLI's --lambda) sets how strongly the QA score
    dominates the fused score; ``neutral_score`` (--c) is the stand-in QA
    score applied to relations that were not validated.
    """

    strategy: Strategy = field(default_factory=StrategyII)
    qa_weight: float = 10.0
    neutral_score: float = 0.9

    def __post_init__(self):
        if self.qa_weight <= 0:
            raise ConfigError(f"qa_weight (lambda) must be > 0, got {self.qa_weight}")
        if not 0.0 < self.neutral_score < 1.0:
            raise ConfigError(f"neutral_score (c) must be in (0, 1), got {self.neutral_score}")

    def check_against_schema(self, schema: RelationSchema) -> None:
        if isinstance(self.strategy, StrategyII) and self.strategy.k > len(schema):
            raise ConfigError(
                f"k={self.strategy.k} exceeds the {len(schema)}-relation schema"
            )
