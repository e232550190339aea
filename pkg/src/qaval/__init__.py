"""qaval: validate and rescore relation-classification predictions with QA.

The pipeline takes per-bag relation score distributions from any external
classifier, asks an extractive QA scorer whether "<head> | <relation>"
questions are answerable with the tail entity in the bag's context, and
fuses the two scores into updated relation scores, with a full evaluation
harness (PR curves, AUC, Precision@N) on top.
"""

__version__ = "0.1.0"

from .core import (
    Bag,
    Mention,
    RcPrediction,
    RelationSchema,
    StrategyI,
    StrategyII,
    ValidationConfig,
    schema_from_labels,
)
from .engine import (
    UpdatedPrediction,
    select_strategy1,
    select_strategy2,
    update_unvalidated,
    update_validated,
    validate_bag,
    validate_dataset,
)
from .errors import (
    ConfigError,
    EvalError,
    ParseError,
    ProtocolError,
    QavalError,
    SchemaError,
    ScorerError,
)
from .evaluate import (
    FactPrediction,
    MetricsReport,
    PrCurve,
    collect_fact_predictions,
    compare_reports,
    count_gold_facts,
    metrics_report,
    pr_curve,
    precision_at_n,
)
from .ingest import Context, build_context, parse_bags, parse_rc_predictions, truncate_sentence
from .samples import QaSample, generate_qa_dataset, make_question
from .scoring import (
    QaScore,
    RemoteSpec,
    SyntheticScorer,
    SyntheticSpec,
    confidence_score,
    dataset_loss,
    facts_from_bags,
    qa_losses,
    validation_score,
)
from .wire import RemoteScorer, ScorerServer
