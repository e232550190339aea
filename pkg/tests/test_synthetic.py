from qaval.ingest import build_context
from qaval.scoring import SyntheticScorer, facts_from_bags, find_token_span, score_to_validation
from qaval.synthetic import make_synthetic_dataset, synthetic_schema


class TestSyntheticDataset:
    def test_deterministic_per_seed(self):
        a = make_synthetic_dataset(40, seed=7)
        b = make_synthetic_dataset(40, seed=7)
        assert a.bags == b.bags
        assert a.rc_preds == b.rc_preds
        assert a.flipped_bag_ids == b.flipped_bag_ids
        c = make_synthetic_dataset(40, seed=8)
        assert a.rc_preds != c.rc_preds

    def test_flip_count_exact(self):
        data = make_synthetic_dataset(200, seed=1, flip_rate=0.3)
        assert len(data.flipped_bag_ids) == round(0.3 * 200)

    def test_flipped_bags_have_wrong_argmax(self):
        data = make_synthetic_dataset(100, seed=2, flip_rate=0.25)
        for bag in data.bags:
            scores = data.rc_preds[bag.bag_id].scores
            argmax = max(range(len(scores)), key=scores.__getitem__)
            (gold,) = bag.true_relations
            if bag.bag_id in data.flipped_bag_ids:
                assert argmax != gold
            else:
                assert argmax == gold

    def test_na_fraction(self):
        data = make_synthetic_dataset(100, seed=3, na_fraction=0.2)
        n_na = sum(bag.true_relations == {data.schema.na_index} for bag in data.bags)
        assert n_na == 20
        # NA bags are never flipped
        for bag_id in data.flipped_bag_ids:
            bag = next(b for b in data.bags if b.bag_id == bag_id)
            assert data.schema.na_index not in bag.true_relations

    def test_tail_findable_in_context(self):
        data = make_synthetic_dataset(30, seed=4)
        for bag in data.bags:
            ctx = build_context(bag, 40)
            assert ctx.tail_span is not None
            assert find_token_span(ctx.tokens, bag.tail.split()) is not None

    def test_oracle_separates_true_from_wrong(self):
        data = make_synthetic_dataset(20, seed=5)
        scorer = SyntheticScorer(
            data.schema, facts_from_bags(data.bags, data.schema), noise=0.1, seed=5
        )
        for bag in data.bags[:10]:
            ctx = build_context(bag, 40)
            (gold,) = bag.true_relations - {data.schema.na_index} or {None}
            if gold is None:
                continue
            val_true = score_to_validation(
                scorer.score(f"{bag.head} | {data.schema.labels[gold]}", ctx)
            )
            wrong = next(i for i in data.schema.non_na_indices() if i != gold)
            val_wrong = score_to_validation(
                scorer.score(f"{bag.head} | {data.schema.labels[wrong]}", ctx)
            )
            assert val_true > 0.8 > val_wrong

    def test_schema_shape(self):
        schema = synthetic_schema(12)
        assert len(schema) == 12
        assert schema.na_label == "NA"
