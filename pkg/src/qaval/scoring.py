"""QA-side math and scorer implementations.

A scorer maps (question, context) to a QaScore: an answerable probability
plus start/end position distributions over the context (index 0 is the
"null" sentinel).  From a QaScore we derive:

* confidence: the best start*end product over spans that avoid "null",
* the validation score: geometric mean of answerable prob and confidence,
* the per-sample position/answerable losses and their dataset average.

The synthetic scorer is a deterministic oracle over a fact table, used for
testing and desk-scale experiments; the remote scorer (see wire.py) talks
to a real model over the scorer wire protocol.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

from .core import RelationSchema
from .ingest import Context
from .samples import QaSample, QUESTION_SEPARATOR

# Probabilities are clamped to this floor before log() so losses stay finite
# on hard negatives; -log(PROB_FLOOR) ~ 27.63 acts as the per-term loss cap.
PROB_FLOOR = 1e-12

NORMALIZATION_TOL = 1e-6


@dataclass(frozen=True, slots=True)
class QaScore:
    """Answerable probability plus start/end distributions over the context."""

    p_ans: float
    p_start: tuple[float, ...]
    p_end: tuple[float, ...]

    def __post_init__(self):
        if not 0.0 <= self.p_ans <= 1.0:
            raise ValueError(f"p_ans={self.p_ans} outside [0, 1]")
        if len(self.p_start) != len(self.p_end):
            raise ValueError(
                f"p_start length {len(self.p_start)} != p_end length {len(self.p_end)}"
            )
        for name, vec in (("p_start", self.p_start), ("p_end", self.p_end)):
            if any(v < 0 for v in vec):
                raise ValueError(f"{name} has negative entries")
            if abs(math.fsum(vec) - 1.0) > NORMALIZATION_TOL:
                raise ValueError(f"{name} sums to {math.fsum(vec)!r}, expected 1")


def confidence_score(
    p_start: Sequence[float], p_end: Sequence[float], max_span_len: int | None = None
) -> float:
    """Best start*end probability product over spans excluding the sentinel.

    Maximizes p_start[i] * p_end[j] over 1 <= i <= j < n, optionally capped
    at spans of j - i + 1 <= max_span_len tokens.  Returns 0 for contexts
    shorter than 2 tokens (no admissible span).
    """
    if len(p_start) != len(p_end):
        raise ValueError(f"length mismatch: {len(p_start)} vs {len(p_end)}")
    n = len(p_start)
    if n < 2:
        return 0.0
    best = 0.0
    if max_span_len is None:
        running_start = 0.0
        for j in range(1, n):
            running_start = max(running_start, p_start[j])
            best = max(best, running_start * p_end[j])
    else:
        if max_span_len < 1:
            raise ValueError(f"max_span_len must be >= 1, got {max_span_len}")
        for j in range(1, n):
            lo = max(1, j - max_span_len + 1)
            window_start = max(p_start[lo : j + 1])
            best = max(best, window_start * p_end[j])
    return best


def validation_score(p_ans: float, p_confidence: float) -> float:
    """Geometric mean of the answerable probability and the span confidence."""
    if not 0.0 <= p_ans <= 1.0:
        raise ValueError(f"p_ans={p_ans} outside [0, 1]")
    if not 0.0 <= p_confidence <= 1.0:
        raise ValueError(f"p_confidence={p_confidence} outside [0, 1]")
    return math.sqrt(p_ans * p_confidence)


def score_to_validation(score: QaScore, max_span_len: int | None = None) -> float:
    """Validation score straight from a QaScore."""
    return validation_score(score.p_ans, confidence_score(score.p_start, score.p_end, max_span_len))


def _safe_log(p: float) -> float:
    return math.log(max(p, PROB_FLOOR))


def qa_losses(sample: QaSample, score: QaScore) -> tuple[float, float]:
    """(position loss, answerable loss) for one scored sample.

    Position loss is the negative log-likelihood of the gold start and end
    positions (both 0 for unanswerable samples); answerable loss is binary
    cross-entropy on the answerable flag.  Probabilities are floored at
    PROB_FLOOR so both terms stay finite.
    """
    if len(score.p_start) != len(sample.context.tokens):
        raise ValueError(
            f"score length {len(score.p_start)} != context length {len(sample.context.tokens)}"
        )
    start, end = sample.answer_span
    last = end - 1  # inclusive end position; (0, 1) -> position 0
    loss_position = -_safe_log(score.p_start[start]) - _safe_log(score.p_end[last])
    if sample.answerable:
        loss_ans = -_safe_log(score.p_ans)
    else:
        loss_ans = -_safe_log(1.0 - score.p_ans)
    return loss_position, loss_ans


def dataset_loss(samples_with_scores: Sequence[tuple[QaSample, QaScore]]) -> float:
    """Average of (position + answerable) losses, halved: (1/2N) * sum."""
    if not samples_with_scores:
        raise ValueError("dataset_loss needs at least one scored sample")
    total = 0.0
    for sample, score in samples_with_scores:
        lp, la = qa_losses(sample, score)
        total += lp + la
    return total / (2 * len(samples_with_scores))


class Scorer(Protocol):
    """Anything that can score (question, context) pairs.

    Implementations must be safe for concurrent score() calls.
    """

    def score(self, question: str, context: Context) -> QaScore: ...


@dataclass(frozen=True)
class SyntheticSpec:
    """Config for the deterministic oracle scorer.

    ``fact_table`` holds (head, relation_index, tail_text) triples the
    oracle treats as true; when None, the CLI derives it from gold labels.
    """

    noise: float = 0.0
    seed: int = 0
    fact_table: frozenset[tuple[str, int, str]] | None = None

    def __post_init__(self):
        if not 0.0 <= self.noise < 1.0:
            raise ValueError(f"noise must be in [0, 1), got {self.noise}")


@dataclass(frozen=True)
class RemoteSpec:
    """Endpoint descriptor for the wire-protocol scorer: host:port or unix:/path."""

    endpoint: str


ScorerSpec = SyntheticSpec | RemoteSpec


class SyntheticScorer:
    """Deterministic oracle over a fact table, with optional multiplicative noise.

    For a true (head, relation, tail) fact the answerable probability and
    the span mass sit near 1 (scaled down by noise * u for a seeded
    pseudo-random u in [0, 1)); otherwise the probability mass collapses
    onto the "null" sentinel and p_ans is near 0.  Scores are a pure
    function of (question, context), so any parallel schedule reproduces
    the serial output.
    """

    def __init__(
        self,
        schema: RelationSchema,
        fact_table: Iterable[tuple[str, int, str]],
        noise: float = 0.0,
        seed: int = 0,
    ):
        if not 0.0 <= noise < 1.0:
            raise ValueError(f"noise must be in [0, 1), got {noise}")
        self._schema = schema
        self._noise = noise
        self._seed = seed
        self._tails: dict[tuple[str, int], list[str]] = {}
        for head, relation, tail in sorted(set(fact_table)):
            self._tails.setdefault((head, relation), []).append(tail)

    def _rng(self, question: str, context: Context) -> random.Random:
        key = hashlib.sha256(
            "\x1f".join([str(self._seed), question, *context.tokens]).encode("utf-8")
        ).hexdigest()
        return random.Random(key)

    def _parse_question(self, question: str) -> tuple[str, int] | None:
        head, sep, label = question.rpartition(QUESTION_SEPARATOR)
        if not sep or not head:
            return None
        try:
            return head, self._schema.index_of(label)
        except Exception:
            return None

    def _find_answer(self, question: str, context: Context) -> tuple[int, int] | None:
        """Span of the first fact tail occurring in the context, if any."""
        parsed = self._parse_question(question)
        if parsed is None:
            return None
        for tail in self._tails.get(parsed, ()):
            span = find_token_span(context.tokens, tail.split())
            if span is not None:
                return span
        return None

    def score(self, question: str, context: Context) -> QaScore:
        rng = self._rng(question, context)
        span = self._find_answer(question, context)
        n = len(context.tokens)
        if span is not None:
            p_ans = 1.0 - self._noise * rng.random()
            start_pos, end_pos = span[0], span[1] - 1
        else:
            p_ans = self._noise * rng.random()
            start_pos = end_pos = 0
        p_start = _spike(n, start_pos, 1.0 - self._noise * rng.random())
        p_end = _spike(n, end_pos, 1.0 - self._noise * rng.random())
        return QaScore(p_ans=p_ans, p_start=p_start, p_end=p_end)


def _spike(n: int, pos: int, mass: float) -> tuple[float, ...]:
    """Distribution with `mass` at `pos` and the residue spread uniformly."""
    if n == 1:
        return (1.0,)
    rest = (1.0 - mass) / (n - 1)
    return tuple(mass if i == pos else rest for i in range(n))


def find_token_span(tokens: Sequence[str], needle: Sequence[str]) -> tuple[int, int] | None:
    """First occurrence of `needle` in `tokens` past the sentinel, as [start, end)."""
    m = len(needle)
    if m == 0:
        return None
    needle = list(needle)
    for i in range(1, len(tokens) - m + 1):
        if list(tokens[i : i + m]) == needle:
            return i, i + m
    return None


def facts_from_bags(bags, schema: RelationSchema) -> frozenset[tuple[str, int, str]]:
    """Gold (head, relation, tail) triples of non-NA labeled bags.

    Tail text is the bag's tail string, matching what Context.tail_text()
    yields when mention tokens spell the entity.
    """
    facts = set()
    for bag in bags:
        for rel in bag.true_relations:
            if rel != schema.na_index:
                facts.add((bag.head, rel, bag.tail))
    return frozenset(facts)
