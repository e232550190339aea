"""Question construction and QA sample generation from gold-labeled bags.

Each gold non-NA relation of a bag yields one answerable sample (the tail
mention is the answer) plus ``neg_per_pos`` unanswerable samples built from
uniformly drawn wrong relations.  NA itself never appears in a question.
Unanswerable samples point at the "null" sentinel, i.e. span (0, 1).
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .core import Bag, RelationSchema
from .errors import ParseError
from .ingest import Context, Lines, iter_lines, parse_json_line, build_context, dump_line

log = logging.getLogger(__name__)

NULL_SPAN = (0, 1)

QUESTION_SEPARATOR = " | "


@dataclass(frozen=True, slots=True)
class QaSample:
    """One (question, context) pair with its answer span and answerable flag."""

    question: str
    context: Context
    answer_span: tuple[int, int]
    answerable: bool

    def __post_init__(self):
        start, end = self.answer_span
        if not 0 <= start < end <= len(self.context.tokens):
            raise ValueError(f"answer_span [{start}, {end}) invalid for context length {len(self.context)}")
        if self.answerable == (self.answer_span == NULL_SPAN):
            raise ValueError(
                f"answerable={self.answerable} inconsistent with answer_span {self.answer_span}"
            )

    def answer_text(self) -> str:
        start, end = self.answer_span
        return " ".join(self.context.tokens[start:end])


def make_question(head: str, relation_label: str) -> str:
    """Concatenate the head entity and the candidate relation label."""
    if not head or not relation_label:
        raise ValueError("head and relation_label must be non-empty")
    return f"{head}{QUESTION_SEPARATOR}{relation_label}"


def _bag_rng(seed: int, bag_id: str) -> random.Random:
    # str-seeded Random is stable across processes and platforms, so per-bag
    # streams are reproducible under any parallel split of the bag list.
    return random.Random(f"{seed}|{bag_id}")


def generate_qa_dataset(
    bags: Sequence[Bag],
    schema: RelationSchema,
    neg_per_pos: int = 2,
    window: int = 40,
    seed: int = 0,
) -> list[QaSample]:
    """Build the QA dataset: positives from gold relations, seeded negatives.

    Bags whose only gold label is NA produce nothing; bags with no tail
    mention surviving truncation are skipped (counted in a warning).
    Output order is deterministic given the seed.
    """
    if neg_per_pos < 0:
        raise ValueError(f"neg_per_pos must be >= 0, got {neg_per_pos}")
    samples: list[QaSample] = []
    skipped = 0
    for bag in bags:
        context = build_context(bag, window)
        positives = sorted(bag.true_relations - {schema.na_index})
        if not positives:
            continue
        if context.tail_span is None:
            skipped += 1
            continue
        rng = _bag_rng(seed, bag.bag_id)
        wrong_pool = sorted(set(schema.non_na_indices()) - set(bag.true_relations))
        for rel in positives:
            samples.append(
                QaSample(
                    question=make_question(bag.head, schema.labels[rel]),
                    context=context,
                    answer_span=context.tail_span,
                    answerable=True,
                )
            )
            for wrong in rng.sample(wrong_pool, min(neg_per_pos, len(wrong_pool))):
                samples.append(
                    QaSample(
                        question=make_question(bag.head, schema.labels[wrong]),
                        context=context,
                        answer_span=NULL_SPAN,
                        answerable=False,
                    )
                )
    if skipped:
        log.warning("skipped %d bag(s) with no tail mention surviving truncation", skipped)
    return samples


def sample_to_obj(sample: QaSample) -> dict:
    return {
        "question": sample.question,
        "context_tokens": list(sample.context.tokens),
        "answer_start": sample.answer_span[0],
        "answer_end": sample.answer_span[1],
        "answerable": sample.answerable,
    }


def write_qa_samples(samples: Iterable[QaSample], out: IO[str]) -> None:
    for sample in samples:
        out.write(dump_line(sample_to_obj(sample)))


def parse_qa_samples(stream: Lines) -> list[QaSample]:
    samples = []
    for line_no, text in iter_lines(stream):
        obj = parse_json_line(line_no, text)
        try:
            samples.append(
                QaSample(
                    question=str(obj["question"]),
                    context=Context(tokens=tuple(str(t) for t in obj["context_tokens"])),
                    answer_span=(int(obj["answer_start"]), int(obj["answer_end"])),
                    answerable=bool(obj["answerable"]),
                )
            )
        except KeyError as exc:
            raise ParseError(f"missing field {exc.args[0]!r}", line_no) from exc
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
    return samples
