import pytest

from qaval.core import (
    Bag,
    Mention,
    RcPrediction,
    RelationSchema,
    StrategyI,
    StrategyII,
    ValidationConfig,
    schema_from_labels,
)
from qaval.errors import ConfigError, SchemaError


class TestSchema:
    def test_na_first(self):
        schema = schema_from_labels(["NA", "contains"], "NA")
        assert schema.na_index == 0
        assert schema.labels == ("NA", "contains")

    def test_na_middle(self):
        schema = schema_from_labels(["contains", "NA", "founder"], "NA")
        assert schema.na_index == 1

    def test_duplicate_labels_rejected(self):
        with pytest.raises(SchemaError, match="duplicate"):
            schema_from_labels(["contains", "contains"], "NA")

    def test_missing_na_rejected(self):
        with pytest.raises(SchemaError, match="NA"):
            schema_from_labels(["a", "b"], "NA")

    def test_too_few_labels(self):
        with pytest.raises(SchemaError):
            schema_from_labels(["NA"], "NA")

    def test_empty_label(self):
        with pytest.raises(SchemaError):
            RelationSchema(labels=("", "x"), na_index=0)

    def test_na_index_out_of_range(self):
        with pytest.raises(SchemaError):
            RelationSchema(labels=("a", "b"), na_index=2)

    def test_lookups_total_over_labels(self):
        schema = schema_from_labels(["NA", "x", "y", "z"], "NA")
        for i, label in enumerate(schema.labels):
            assert schema.index_of(label) == i
        with pytest.raises(SchemaError, match="unknown"):
            schema.index_of("nope")

    def test_non_na_indices(self):
        schema = schema_from_labels(["x", "NA", "y"], "NA")
        assert schema.non_na_indices() == (0, 2)


class TestMention:
    def test_valid(self):
        m = Mention(0, 1, 3)
        assert (m.token_start, m.token_end) == (1, 3)

    @pytest.mark.parametrize("args", [(-1, 0, 1), (0, -1, 1), (0, 2, 2), (0, 3, 1)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            Mention(*args)


class TestBag:
    def test_mention_sentence_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            Bag("b", "h", "t", (("a", "b"),), (Mention(1, 0, 1),), (Mention(0, 0, 1),))

    def test_mention_exceeds_sentence(self):
        with pytest.raises(ValueError, match="exceeds"):
            Bag("b", "h", "t", (("a", "b"),), (Mention(0, 0, 3),), (Mention(0, 0, 1),))

    def test_no_sentences(self):
        with pytest.raises(ValueError):
            Bag("b", "h", "t", (), (), ())

    def test_mentions_in_sentence(self):
        bag = Bag(
            "b", "h", "t",
            (("a", "b"), ("c", "d")),
            (Mention(0, 0, 1), Mention(1, 0, 1)),
            (Mention(1, 1, 2),),
        )
        heads, tails = bag.mentions_in_sentence(1)
        assert len(heads) == 1 and len(tails) == 1
        heads, tails = bag.mentions_in_sentence(0)
        assert len(heads) == 1 and not tails


class TestRcPrediction:
    def test_score_out_of_range(self):
        with pytest.raises(ValueError):
            RcPrediction("b", (0.5, 1.2))
        with pytest.raises(ValueError):
            RcPrediction("b", (-0.1, 0.4))

    def test_scores_need_not_sum_to_one(self):
        pred = RcPrediction("b", (0.9, 0.9, 0.9))
        assert sum(pred.scores) > 1


class TestValidationConfig:
    def test_strategy1_percent_budget(self):
        with pytest.raises(ConfigError):
            StrategyI(alpha_percent=60, beta_percent=50)
        with pytest.raises(ConfigError):
            StrategyI(alpha_percent=-1, beta_percent=0)

    def test_strategy2_k_positive(self):
        with pytest.raises(ConfigError):
            StrategyII(k=0)

    def test_lambda_positive(self):
        with pytest.raises(ConfigError):
            ValidationConfig(qa_weight=0)

    def test_c_open_interval(self):
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ConfigError):
                ValidationConfig(neutral_score=bad)

    def test_k_capped_by_schema(self):
        schema = schema_from_labels(["NA", "a", "b"], "NA")
        config = ValidationConfig(strategy=StrategyII(k=4))
        with pytest.raises(ConfigError):
            config.check_against_schema(schema)
        ValidationConfig(strategy=StrategyII(k=3)).check_against_schema(schema)

    def test_defaults_match_reference_settings(self):
        config = ValidationConfig()
        assert config.qa_weight == 10.0
        assert config.neutral_score == 0.9
        assert config.strategy == StrategyII(k=3)
        assert StrategyI() == StrategyI(alpha_percent=10.0, beta_percent=20.0)
