"""Seeded synthetic bags and classifier scores for pipeline tests and demos.

Every bag gets a distinct entity pair and a sentence that actually spells
out both entities, so the tail is findable in the built context exactly
like real distant-supervision data.  Classifier score vectors start from
the gold relation and a chosen fraction of bags gets its argmax flipped to
a wrong relation, emulating a classifier with a known error rate.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import Bag, Mention, RcPrediction, RelationSchema, schema_from_labels

_FILLER = (
    "the", "report", "said", "that", "in", "a", "statement", "about", "its",
    "plans", "for", "next", "year", "officials", "noted", "growth",
)


@dataclass(frozen=True, slots=True)
class SyntheticDataset:
    schema: RelationSchema
    bags: list[Bag]
    rc_preds: dict[str, RcPrediction]
    flipped_bag_ids: frozenset[str]


def synthetic_schema(n_relations: int) -> RelationSchema:
    """NA plus n_relations-1 invented relation labels."""
    if n_relations < 2:
        raise ValueError("need at least 2 relations (NA plus one)")
    labels = ["NA"] + [f"rel_{i}" for i in range(1, n_relations)]
    return schema_from_labels(labels, "NA")


def _make_sentence(rng: random.Random, head_tokens: list[str], tail_tokens: list[str]):
    lead = rng.choices(_FILLER, k=rng.randint(1, 4))
    mid = rng.choices(_FILLER, k=rng.randint(1, 5))
    trail = rng.choices(_FILLER, k=rng.randint(0, 3))
    first, second = (head_tokens, tail_tokens) if rng.random() < 0.8 else (tail_tokens, head_tokens)
    tokens = lead + first + mid + second + trail
    first_span = (len(lead), len(lead) + len(first))
    second_start = len(lead) + len(first) + len(mid)
    second_span = (second_start, second_start + len(second))
    if first is head_tokens:
        return tokens, first_span, second_span
    return tokens, second_span, first_span

def make_synthetic_dataset(
    n_bags: int,
    n_relations: int = 12,
    seed: int = 0,
    flip_rate: float = 0.3,
    na_fraction: float = 0.0,
) -> SyntheticDataset:
    """Gold-labelled bags plus one-hot-ish RC scores with seeded argmax flips.

    Gold relations score in [0.6, 1.0], the rest in [0, 0.35].  On a
    flip_rate fraction of non-NA bags the gold score is swapped with a
    random wrong relation's, so the classifier argmax is wrong there.
    """
    schema = synthetic_schema(n_relations)
    rng = random.Random(f"synthetic|{seed}")
    bags = []
    raw_scores: dict[str, list[float]] = {}
    non_na = list(schema.non_na_indices())
    n_na_bags = round(na_fraction * n_bags)
    for i in range(n_bags):
        bag_id = f"bag{i:05d}"
        head = f"head_{i}"
        tail_tokens = ["tail", f"entity_{i}"]
        gold = schema.na_index if i < n_na_bags else rng.choice(non_na)
        sentences, head_mentions, tail_mentions = [], [], []
        for si in range(rng.randint(1, 2)):
            tokens, head_span, tail_span = _make_sentence(rng, [head], list(tail_tokens))
            sentences.append(tuple(tokens))
            head_mentions.append(Mention(si, *head_span))
            tail_mentions.append(Mention(si, *tail_span))
        bags.append(
            Bag(
                bag_id=bag_id,
                head=head,
                tail=" ".join(tail_tokens),
                sentences=tuple(sentences),
                head_mentions=tuple(head_mentions),
                tail_mentions=tuple(tail_mentions),
                true_relations=frozenset({gold}),
            )
        )
        scores = [rng.uniform(0.0, 0.35) for _ in range(n_relations)]
        if gold != schema.na_index:
            scores[gold] = rng.uniform(0.6, 1.0)
        raw_scores[bag_id] = scores
    flippable = [
        bag.bag_id for bag in bags if bag.true_relations != frozenset({schema.na_index})
    ]
    flipped = frozenset(rng.sample(flippable, round(flip_rate * len(flippable))))
    rc_preds = {}
    for bag in bags:
        scores = raw_scores[bag.bag_id]
        if bag.bag_id in flipped:
            (gold,) = bag.true_relations
            wrong = rng.choice([r for r in non_na if r != gold])
            scores[gold], scores[wrong] = scores[wrong], scores[gold]
        rc_preds[bag.bag_id] = RcPrediction(bag_id=bag.bag_id, scores=tuple(scores))
    return SyntheticDataset(schema=schema, bags=bags, rc_preds=rc_preds, flipped_bag_ids=flipped)
