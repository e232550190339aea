"""Shared fixtures and independent test oracles."""

from __future__ import annotations

import random

import pytest

from qaval.core import Bag, Mention, RelationSchema, schema_from_labels


def brute_force_confidence(p_start, p_end) -> float:
    """All-pairs reference for the best non-null span product (test oracle)."""
    best = 0.0
    for i in range(1, len(p_start)):
        for j in range(i, len(p_end)):
            best = max(best, p_start[i] * p_end[j])
    return best


def random_prob_vector(rng: random.Random, n: int) -> tuple[float, ...]:
    raw = [rng.random() + 1e-9 for _ in range(n)]
    total = sum(raw)
    return tuple(v / total for v in raw)


@pytest.fixture
def schema3() -> RelationSchema:
    return schema_from_labels(["NA", "contains", "neighborhood_of"], "NA")


@pytest.fixture
def jobs_bag() -> Bag:
    sentence = ("in", "1976", "Jobs", "co-founded", "Apple", "in", "a", "garage")
    return Bag(
        bag_id="jobs-apple",
        head="Jobs",
        tail="Apple",
        sentences=(sentence,),
        head_mentions=(Mention(0, 2, 3),),
        tail_mentions=(Mention(0, 4, 5),),
        true_relations=frozenset({1}),
    )


def make_bag(
    bag_id: str = "b0",
    head: str = "H",
    tail: str = "T",
    true_relations=frozenset({1}),
    n_lead: int = 2,
    n_mid: int = 2,
    n_trail: int = 1,
) -> Bag:
    """Single-sentence bag "<lead...> H <mid...> T <trail...>" with one mention each."""
    lead = tuple(f"w{i}" for i in range(n_lead))
    mid = tuple(f"m{i}" for i in range(n_mid))
    trail = tuple(f"z{i}" for i in range(n_trail))
    head_tokens = tuple(head.split())
    tail_tokens = tuple(tail.split())
    sentence = lead + head_tokens + mid + tail_tokens + trail
    h_start = len(lead)
    t_start = len(lead) + len(head_tokens) + len(mid)
    return Bag(
        bag_id=bag_id,
        head=head,
        tail=tail,
        sentences=(sentence,),
        head_mentions=(Mention(0, h_start, h_start + len(head_tokens)),),
        tail_mentions=(Mention(0, t_start, t_start + len(tail_tokens)),),
        true_relations=frozenset(true_relations),
    )
