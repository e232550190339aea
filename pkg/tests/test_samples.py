import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaval.core import schema_from_labels
from qaval.ingest import Context, build_context
from qaval.samples import (
    NULL_SPAN,
    QaSample,
    generate_qa_dataset,
    make_question,
    parse_qa_samples,
    sample_to_obj,
    write_qa_samples,
)

from conftest import make_bag


class TestMakeQuestion:
    @pytest.mark.parametrize(
        "head,label,want",
        [
            ("Jobs", "co-founded", "Jobs | co-founded"),
            ("Jobs", "located in", "Jobs | located in"),
            ("Cook county", "contains", "Cook county | contains"),
        ],
    )
    def test_concatenation(self, head, label, want):
        assert make_question(head, label) == want

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError):
            make_question("", "contains")
        with pytest.raises(ValueError):
            make_question("Jobs", "")


class TestQaSampleType:
    def test_answerable_iff_not_null_span(self):
        ctx = Context(tokens=("null", "a", "b"))
        QaSample("q", ctx, (1, 2), True)
        QaSample("q", ctx, NULL_SPAN, False)
        with pytest.raises(ValueError):
            QaSample("q", ctx, NULL_SPAN, True)
        with pytest.raises(ValueError):
            QaSample("q", ctx, (1, 2), False)

    def test_span_in_range(self):
        ctx = Context(tokens=("null", "a"))
        with pytest.raises(ValueError):
            QaSample("q", ctx, (1, 3), True)


def big_schema(n_non_na: int = 8):
    return schema_from_labels(["NA"] + [f"r{i}" for i in range(1, n_non_na + 1)], "NA")


class TestGenerate:
    def test_one_positive_two_negatives(self):
        schema = big_schema()
        bag = make_bag(true_relations={1})
        samples = generate_qa_dataset([bag], schema, neg_per_pos=2, window=40, seed=7)
        assert len(samples) == 3
        assert sum(s.answerable for s in samples) == 1
        positive = samples[0]
        assert positive.answerable
        assert positive.question == "H | r1"
        assert positive.answer_text() == bag.tail

    def test_na_only_bag_yields_nothing(self):
        schema = big_schema()
        bag = make_bag(true_relations={0})
        assert generate_qa_dataset([bag], schema, neg_per_pos=2) == []

    def test_zero_negatives(self):
        schema = big_schema()
        bag = make_bag(true_relations={1, 3})
        samples = generate_qa_dataset([bag], schema, neg_per_pos=0)
        assert len(samples) == 2
        assert all(s.answerable for s in samples)

    def test_negatives_exclude_gold_and_na(self):
        schema = big_schema()
        bag = make_bag(true_relations={1, 2})
        samples = generate_qa_dataset([bag], schema, neg_per_pos=6, seed=3)
        negative_labels = {
            s.question.split(" | ")[1] for s in samples if not s.answerable
        }
        assert "NA" not in negative_labels
        assert not negative_labels & {"r1", "r2"}
        # only 6 wrong relations exist; both positives drew all of them
        assert negative_labels == {f"r{i}" for i in range(3, 9)}

    def test_neg_per_pos_clamped_to_available(self):
        schema = schema_from_labels(["NA", "a", "b"], "NA")
        bag = make_bag(true_relations={1})
        samples = generate_qa_dataset([bag], schema, neg_per_pos=5)
        # only one wrong non-NA relation exists
        assert len(samples) == 2

    def test_unanswerable_points_at_sentinel(self):
        schema = big_schema()
        samples = generate_qa_dataset([make_bag()], schema, neg_per_pos=2)
        for s in samples:
            if not s.answerable:
                assert s.answer_span == NULL_SPAN
                assert s.context.tokens[0] == "null"

    def test_skips_bag_without_tail_mention(self, caplog):
        from qaval.core import Bag, Mention

        schema = big_schema()
        no_tail = Bag(
            "nt", "H", "T", (("H", "only"),), (Mention(0, 0, 1),), (), frozenset({1})
        )
        with caplog.at_level("WARNING"):
            samples = generate_qa_dataset([no_tail, make_bag()], schema, neg_per_pos=1)
        assert "skipped 1" in caplog.text
        assert {s.question.split(" | ")[0] for s in samples} == {"H"}
        assert len(samples) == 2

    def test_multi_label_bag_one_positive_per_relation(self):
        schema = big_schema()
        bag = make_bag(true_relations={2, 5})
        samples = generate_qa_dataset([bag], schema, neg_per_pos=2)
        positives = [s for s in samples if s.answerable]
        assert [s.question for s in positives] == ["H | r2", "H | r5"]
        assert len(samples) == 6

    @given(
        n_bags=st.integers(1, 8),
        seed=st.integers(0, 10_000),
    )
    @settings(max_examples=60, deadline=None)
    def test_ratio_property(self, n_bags, seed):
        schema = big_schema()
        bags = [make_bag(bag_id=f"b{i}", true_relations={1 + i % 4}) for i in range(n_bags)]
        samples = generate_qa_dataset(bags, schema, neg_per_pos=2, seed=seed)
        n_pos = sum(s.answerable for s in samples)
        n_neg = sum(not s.answerable for s in samples)
        assert n_neg == 2 * n_pos

    def test_same_seed_byte_identical(self):
        schema = big_schema()
        bags = [make_bag(bag_id=f"b{i}", true_relations={1 + i % 4}) for i in range(5)]

        def render(seed):
            out = io.StringIO()
            write_qa_samples(generate_qa_dataset(bags, schema, neg_per_pos=2, seed=seed), out)
            return out.getvalue()

        assert render(42) == render(42)
        assert render(42) != render(43)

    def test_positive_span_matches_context_tail(self):
        schema = big_schema()
        bag = make_bag(tail="Grand Forks")
        ctx = build_context(bag, 40)
        samples = generate_qa_dataset([bag], schema, neg_per_pos=1)
        positive = next(s for s in samples if s.answerable)
        assert positive.answer_span == ctx.tail_span
        assert positive.answer_text() == "Grand Forks"


class TestSampleFile:
    def test_round_trip_preserves_records(self):
        schema = big_schema()
        bags = [make_bag(bag_id=f"b{i}", true_relations={1 + i % 3}) for i in range(4)]
        samples = generate_qa_dataset(bags, schema, neg_per_pos=2, seed=5)
        out = io.StringIO()
        write_qa_samples(samples, out)
        again = parse_qa_samples(io.StringIO(out.getvalue()))
        assert [sample_to_obj(s) for s in again] == [sample_to_obj(s) for s in samples]

    def test_parse_rejects_span_flag_mismatch(self):
        line = (
            '{"question":"q | r","context_tokens":["null","a"],'
            '"answer_start":0,"answer_end":1,"answerable":true}\n'
        )
        from qaval.errors import ParseError

        with pytest.raises(ParseError):
            parse_qa_samples(io.StringIO(line))
