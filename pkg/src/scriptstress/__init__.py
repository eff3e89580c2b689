"""Stress index estimation from scanned handwritten answer scripts.

Pages are rasterized, binarized, transcribed by one or more OCR backends
(confidence vote), scored for sentiment, and fused into a per-page index

    S = 0.6 * P_neg + 0.3 * H + 0.1 * (1 - P_pos)

where H is the Shannon entropy (nats) of the sentiment triple.
"""

from .analytics import (AccuracyReport, Cluster, StudentSeries, aggregate_student, char_accuracy,
                        cluster_two_means, detect_anomalies, pearson_r, throughput, word_accuracy)
from .backends import (BackendClient, BackendDescriptor, BackendKind, Lexicon, OcrCandidate,
                       OcrParams, SentimentScores, mock_ocr, mock_sentiment)
from .ensemble import VoteMethod, VotingResult, edit_distance, similarity, vote
from .errors import (AggregationError, BackendProtocolError, BackendUnavailable, ConfigError,
                     DocumentError, InputError, PageError, PreprocessError)
from .ingestion import DocumentSource, PageImage, discover_inputs, page_label, rasterize_document
from .pipeline import PipelineConfig, load_config, run_pipeline
from .preprocess import (PreprocessConfig, binarize, enhance, otsu_threshold, preprocess_page,
                         to_grayscale)
from .reporting import RunSummary, emit_page_json, emit_plot_series
from .stress import (PageStressRecord, StressLevel, StressWeights, build_record, classify_stress,
                     shannon_entropy, stress_index)

__version__ = "0.1.0"
