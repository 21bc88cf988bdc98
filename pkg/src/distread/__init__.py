"""Sentiment outlier analysis of time-ordered multilingual short texts.

Score texts with a recurrent sentiment network over cross-lingually aligned
word vectors, find abnormally positive or negative stretches with the
generalized ESD test, and summarize them by term frequency.
"""

__version__ = "0.1.0"

from .corpus import Corpus, TweetRecord, detect_language, parse_tweets, tokenize
from .embeddings import (
    EmbeddingTable,
    OrthogonalMap,
    csls_neighbors,
    load_embeddings,
    procrustes_align,
)
from .errors import DegenerateError, DistreadError, EmptyAnalysisError, InputError
from .esd import EsdConfig, EsdResult, esd_test, regularized_incomplete_beta, t_quantile
from .linalg import svd
from .pipeline import AnalysisSettings, analyze, build_report
from .report import OutlierReport
from .sentiment import (
    LabeledExample,
    ModelConfig,
    SentimentModel,
    TrainConfig,
    baseline_score,
    bce_loss,
    forward,
    load_weights,
    save_weights,
    train,
)
from .timeline import day_profile, moving_average, segment_regions, term_frequencies
