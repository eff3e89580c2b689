"""Sentiment entropy and the fused per-page Stress Index.

    S = 0.6 * P_neg + 0.3 * H + 0.1 * (1 - P_pos),   H = -sum p ln p

Entropy is in nats. With the default weights the largest reachable value is
0.3 ln(e^2 + 1 + e^(-1/3)) + 0.1 ~= 0.7627; other weights can push the raw
score past 1, so the returned index is clamped to [0, 1].

Sentiment models usually emit float32 softmax outputs. Passing
``dtype=np.float32`` evaluates the entropy term in single precision, which
reproduces scores produced by such float32 pipelines bit for bit; the
weighted sum is always taken in double precision.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .backends import SentimentScores

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.30


@dataclass(frozen=True)
class StressWeights:
    w_neg: float = 0.6
    w_entropy: float = 0.3
    w_posdef: float = 0.1

    def __post_init__(self):
        if min(self.w_neg, self.w_entropy, self.w_posdef) < 0:
            raise ValueError("stress weights must be non-negative")


class StressLevel(str, enum.Enum):
    LOW = "low"
    HIGH = "high"


@dataclass(frozen=True)
class PageStressRecord:
    student: str
    sentiment: SentimentScores
    entropy: float
    stress_index: float

    def to_json(self) -> dict:
        return {
            "student": self.student,
            "sentiment": self.sentiment.to_json(),
            "entropy": self.entropy,
            "stress_index": self.stress_index,
        }

    @classmethod
    def from_json(cls, data: dict) -> "PageStressRecord":
        s = data["sentiment"]
        return cls(data["student"], SentimentScores(s["negative"], s["neutral"], s["positive"]),
                   float(data["entropy"]), float(data["stress_index"]))


def shannon_entropy(s: SentimentScores, dtype=np.float64) -> float:
    """-sum p ln p over the triple, with 0 ln 0 = 0."""
    if np.dtype(dtype) == np.float64:
        return -math.fsum(p * math.log(p) for p in s.as_tuple() if p > 0.0) + 0.0
    p = np.asarray(s.as_tuple(), dtype=dtype)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum()) + 0.0


def raw_stress_index(s: SentimentScores, w: StressWeights = StressWeights(), dtype=np.float64) -> float:
    """Unclamped fusion score."""
    h = shannon_entropy(s, dtype)
    return w.w_neg * s.negative + w.w_entropy * h + w.w_posdef * (1.0 - s.positive)


def stress_index(s: SentimentScores, w: StressWeights = StressWeights(), dtype=np.float64) -> float:
    raw = raw_stress_index(s, w, dtype)
    if raw > 1.0 or raw < 0.0:
        logger.warning("stress index %.6f outside [0, 1], clamping", raw)
    return min(max(raw, 0.0), 1.0)


def classify_stress(score: float, threshold: float = DEFAULT_THRESHOLD) -> StressLevel:
    return StressLevel.HIGH if score > threshold else StressLevel.LOW


def build_record(label: str, s: SentimentScores, w: StressWeights = StressWeights(),
                 dtype=np.float64) -> PageStressRecord:
    return PageStressRecord(label, s, shannon_entropy(s, dtype), stress_index(s, w, dtype))
