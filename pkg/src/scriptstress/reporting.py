"""Writers for page records, per-student plot data and the run summary.

JSON floats use Python's shortest round-trip ``repr``; CSV cells use 10
decimal places with trailing zeros dropped. Statistics that are undefined are left out, never null.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from .analytics import StudentSeries
from .stress import PageStressRecord, classify_stress

PROGRESSION_HEADER = ["page_index", "stress_index", "negative", "neutral", "positive"]
SCATTER_HEADER = ["negative", "stress_index"]


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _write_text(path: Path, text: str) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def fmt10(x: float) -> str:
    text = format(float(x), ".10f").rstrip("0").rstrip(".")
    return "0" if text in ("", "-0") else text


def emit_page_json(record: PageStressRecord, out_dir) -> Path:
    """Write ``<label>.json`` with keys student, sentiment, entropy, stress_index."""
    return _write_text(Path(out_dir) / f"{record.student}.json", _dump(record.to_json()))


def _csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def series_summary(series: StudentSeries, threshold: float | None = None) -> dict:
    out = {
        "student_id": series.student_id,
        "pages": len(series.records),
        "mean_stress": series.mean_stress,
        "mean_sentiment": series.mean_sentiment.to_json(),
        "anomalies": [{"page_index": p, "score": z} for p, z in series.anomalies],
        "clusters": [{"page_index": p, "cluster": c.value} for p, c in sorted(series.clusters.items())],
    }
    if threshold is not None:
        out["threshold"] = threshold
        out["stress_levels"] = [
            {"page_index": p, "level": classify_stress(r.stress_index, threshold).value}
            for p, r in zip(series.page_indices, series.records)
        ]
    if series.neg_stress_r is not None:
        out["neg_stress_r"] = series.neg_stress_r
    return out


def emit_plot_series(series: StudentSeries, out_dir, threshold: float | None = None,
                     extra: dict | None = None) -> list[Path]:
    """Progression CSV, negative-vs-stress scatter CSV and the summary JSON."""
    out_dir = Path(out_dir)
    sid = series.student_id
    progression = [PROGRESSION_HEADER] + [
        [str(p), fmt10(r.stress_index), *(fmt10(v) for v in r.sentiment.as_tuple())]
        for p, r in zip(series.page_indices, series.records)
    ]
    scatter = [SCATTER_HEADER] + [[fmt10(r.sentiment.negative), fmt10(r.stress_index)] for r in series.records]
    summary = series_summary(series, threshold)
    if extra:
        summary.update(extra)
    return [
        _write_text(out_dir / f"{sid}_progression.csv", _csv(progression)),
        _write_text(out_dir / f"{sid}_neg_vs_stress.csv", _csv(scatter)),
        _write_text(out_dir / f"{sid}_summary.json", _dump(summary)),
    ]


@dataclass
class RunSummary:
    students: list[StudentSeries] = field(default_factory=list)
    pages_total: int = 0
    warnings: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    throughput: float | None = None
    wall_seconds: float | None = None
    accuracy: dict | None = None
    config_echo: dict = field(default_factory=dict)

    def to_json(self, include_timing: bool = False) -> dict:
        """Timing is left out by default so reruns with mocks are byte-identical."""
        out = {
            "students": [s.student_id for s in self.students],
            "pages_total": self.pages_total,
            "pages_per_student": {s.student_id: len(s.records) for s in self.students},
            "warnings": list(self.warnings),
            "errors": list(self.errors),
        }
        if self.accuracy is not None:
            out["accuracy"] = self.accuracy
        if include_timing and self.throughput is not None:
            out["wall_seconds"] = self.wall_seconds
            out["images_per_second"] = self.throughput
        out["config"] = self.config_echo
        return out


def emit_run_summary(summary: RunSummary, out_dir, include_timing: bool = False) -> Path:
    return _write_text(Path(out_dir) / "run_summary.json", _dump(summary.to_json(include_timing)))
