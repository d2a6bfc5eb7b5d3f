"""Dominance analytics for synchronous chat transcripts.

Pipeline: parse transcripts, extract per-comment textual indicators, ingest
manually coded annotations, fit logistic models of per-comment expression of
dominance (ED), and flag dominant group members by their share of ED comments.
"""

from chatdom.annotations import (
    Annotations,
    EDLabelSet,
    ManualCodes,
    ReliabilityReport,
    cohens_kappa,
    load_annotations,
    percent_agreement,
    reconcile,
)
from chatdom.corpus import Comment, CorpusStats, Transcript, corpus_stats, parse_transcript
from chatdom.dominance import (
    DominanceReport,
    EDScore,
    dominance_shares,
    evaluate_scoring,
    score_comments,
)
from chatdom.features import (
    CommentFeatures,
    LexiconConfig,
    ParticipantAggregate,
    aggregate_participant,
    extract_features,
    tokenize,
)
from chatdom.glm import (
    BatchFit,
    DesignMatrix,
    FitOptions,
    LogitModel,
    aic,
    compare_models,
    deviance,
    fit,
    fit_batch,
    predict_prob,
)

__version__ = "0.1.0"

__all__ = [
    "BatchFit",
    "Annotations",
    "Comment",
    "CommentFeatures",
    "CorpusStats",
    "DesignMatrix",
    "DominanceReport",
    "EDLabelSet",
    "EDScore",
    "FitOptions",
    "LexiconConfig",
    "LogitModel",
    "ManualCodes",
    "ParticipantAggregate",
    "ReliabilityReport",
    "Transcript",
    "aggregate_participant",
    "aic",
    "cohens_kappa",
    "compare_models",
    "corpus_stats",
    "deviance",
    "dominance_shares",
    "evaluate_scoring",
    "extract_features",
    "fit",
    "fit_batch",
    "load_annotations",
    "parse_transcript",
    "percent_agreement",
    "predict_prob",
    "reconcile",
    "score_comments",
    "tokenize",
]
