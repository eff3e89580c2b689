"""Per-student aggregation, correlation, outlier flags, clustering, OCR accuracy."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .backends import SentimentScores, mean_scores
from .ensemble import edit_distance
from .errors import AggregationError
from .stress import PageStressRecord

MAD_SCALE = 0.6745
DEFAULT_ANOMALY_CUTOFF = 3.5
MIN_ANOMALY_POINTS = 4

_LABEL_RE = re.compile(r"^(?P<student>.+)_page_(?P<page>[1-9][0-9]*)$")


class Cluster(str, enum.Enum):
    LOW = "low_cluster"
    HIGH = "high_cluster"


def split_label(label: str) -> tuple[str, int]:
    m = _LABEL_RE.match(label)
    if m is None:
        raise AggregationError(f"not a page label: {label!r}")
    return m["student"], int(m["page"])


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Sample Pearson correlation, or None when either input is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D and the same length")
    if x.size < 2 or np.all(x == x[0]) or np.all(y == y[0]):
        return None
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    if denom == 0.0:
        return None
    return float(np.clip(np.dot(dx, dy) / denom, -1.0, 1.0))


def modified_z_scores(values: Sequence[float]) -> np.ndarray | None:
    """0.6745 (x - median) / MAD; falls back to ordinary z-scores when MAD is 0.

    Returns None when neither spread measure is positive.
    """
    x = np.asarray(values, dtype=np.float64)
    med = np.median(x)
    mad = np.median(np.abs(x - med))
    if mad > 0:
        return MAD_SCALE * (x - med) / mad
    sd = x.std(ddof=1) if x.size > 1 else 0.0
    if sd > 0:
        return (x - x.mean()) / sd
    return None


def detect_anomalies(values: Sequence[float], cutoff: float = DEFAULT_ANOMALY_CUTOFF,
                     min_points: int = MIN_ANOMALY_POINTS) -> list[tuple[int, float]]:
    """Indices whose robust z-score exceeds ``cutoff`` in magnitude, with the score."""
    if len(values) < min_points:
        return []
    z = modified_z_scores(values)
    if z is None:
        return []
    return [(i, float(score)) for i, score in enumerate(z) if abs(score) > cutoff]


def cluster_two_means(values: Sequence[float], max_iter: int = 100) -> list[Cluster]:
    """1-D 2-means seeded at min and max.

    Points equidistant from both centroids join the lower one.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least two values to cluster")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return [Cluster.LOW] * x.size
    assign = None
    for _ in range(max_iter):
        new = np.abs(x - hi) < np.abs(x - lo)  # True = high cluster
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        if assign.all() or not assign.any():
            break
        lo, hi = float(x[~assign].mean()), float(x[assign].mean())
    return [Cluster.HIGH if a else Cluster.LOW for a in assign]


def char_accuracy(reference: str, hypothesis: str) -> float:
    """1 - CER, clamped at 0."""
    return _accuracy(reference, hypothesis)


def word_accuracy(reference: str, hypothesis: str) -> float:
    """1 - WER over whitespace tokens, clamped at 0."""
    return _accuracy(reference.split(), hypothesis.split())


def _accuracy(ref: Sequence, hyp: Sequence) -> float:
    if len(ref) == 0:
        return 1.0 if len(hyp) == 0 else 0.0
    return max(0.0, 1.0 - edit_distance(ref, hyp) / len(ref))


def throughput(pages_processed: int, wall_seconds: float) -> float:
    if wall_seconds <= 0:
        raise ValueError("wall_seconds must be positive")
    return pages_processed / wall_seconds


@dataclass(frozen=True)
class AccuracyReport:
    char_accuracy: float
    word_accuracy: float
    images_per_second: float | None = None
    pages_evaluated: int = 1


@dataclass
class StudentSeries:
    student_id: str
    records: list[PageStressRecord]
    page_indices: list[int]
    mean_stress: float
    mean_sentiment: SentimentScores
    anomalies: list[tuple[int, float]] = field(default_factory=list)
    clusters: dict[int, Cluster] = field(default_factory=dict)
    neg_stress_r: float | None = None

    @property
    def stress(self) -> list[float]:
        return [r.stress_index for r in self.records]

    @property
    def negative(self) -> list[float]:
        return [r.sentiment.negative for r in self.records]


def aggregate_student(records: Sequence[PageStressRecord],
                      anomaly_cutoff: float = DEFAULT_ANOMALY_CUTOFF) -> StudentSeries:
    """Order one student's pages and compute the series statistics."""
    if not records:
        raise AggregationError("no records to aggregate")
    keyed = [(split_label(r.student), r) for r in records]
    students = {sid for (sid, _), _ in keyed}
    if len(students) != 1:
        raise AggregationError(f"records from several students: {sorted(students)}")
    seen: dict[int, str] = {}
    for (_, page), r in keyed:
        if page in seen:
            raise AggregationError(f"duplicate page index {page}: {seen[page]} and {r.student}")
        seen[page] = r.student
    keyed.sort(key=lambda item: item[0][1])

    ordered = [r for _, r in keyed]
    pages = [page for (_, page), _ in keyed]
    stress = [r.stress_index for r in ordered]
    series = StudentSeries(
        student_id=students.pop(),
        records=ordered,
        page_indices=pages,
        mean_stress=float(np.mean(stress)),
        mean_sentiment=mean_scores(r.sentiment for r in ordered),
    )
    series.anomalies = [(pages[i], z) for i, z in detect_anomalies(stress, anomaly_cutoff)]
    if len(ordered) >= 2:
        series.clusters = dict(zip(pages, cluster_two_means(stress)))
        series.neg_stress_r = pearson_r(series.negative, stress)
    return series
