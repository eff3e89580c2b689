"""Batch orchestration: scripts in, page records and plot data out.

Exit codes follow the usual batch-tool convention: 0 clean, 1 when some
document or page failed but the rest completed, 2 on a fatal configuration
or input error.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import analytics
from .backends import BackendClient, BackendDescriptor, BackendKind, OcrParams
from .ensemble import vote
from .errors import (BackendProtocolError, BackendUnavailable, ConfigError, InputError,
                     PageError)
from .ingestion import (DEFAULT_DPI, GROUND_TRUTH_SUFFIX, PageImage, discover_inputs,
                        rasterize_document, save_page_png)
from .preprocess import PreprocessConfig, mask_to_gray, preprocess_page
from .reporting import RunSummary, emit_page_json, emit_plot_series, emit_run_summary
from .stress import DEFAULT_THRESHOLD, PageStressRecord, StressWeights, build_record

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_PARTIAL, EXIT_FATAL = 0, 1, 2
_PRECISIONS = {"float64": np.float64, "float32": np.float32}


@dataclass
class PipelineConfig:
    input_dir: Path
    out_dir: Path
    dpi: int = DEFAULT_DPI
    weights: StressWeights = field(default_factory=StressWeights)
    threshold: float = DEFAULT_THRESHOLD
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    backends: list[BackendDescriptor] = field(default_factory=list)
    ocr_params: OcrParams = field(default_factory=OcrParams)
    anomaly_cutoff: float = analytics.DEFAULT_ANOMALY_CUTOFF
    keep_intermediates: bool = False
    mock_corpus: Path | None = None
    workers: int = 4
    entropy_precision: str = "float64"
    record_timing: bool = False

    def __post_init__(self):
        self.input_dir = Path(self.input_dir)
        self.out_dir = Path(self.out_dir)
        if self.mock_corpus is not None:
            self.mock_corpus = Path(self.mock_corpus)
        if not self.backends and self.mock_corpus is not None:
            self.backends = [
                BackendDescriptor("mock-ocr", "mock", BackendKind.OCR),
                BackendDescriptor("mock-sentiment", "mock", BackendKind.SENTIMENT),
            ]

    @property
    def ocr_backends(self) -> list[BackendDescriptor]:
        return sorted((b for b in self.backends if b.kind is BackendKind.OCR), key=lambda b: b.priority)

    @property
    def sentiment_backend(self) -> BackendDescriptor:
        return next(b for b in self.backends if b.kind is BackendKind.SENTIMENT)

    def validate(self):
        if self.dpi <= 0:
            raise ConfigError(f"dpi must be positive, got {self.dpi}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.entropy_precision not in _PRECISIONS:
            raise ConfigError(f"entropy_precision must be one of {sorted(_PRECISIONS)}")
        ids = [b.backend_id for b in self.backends]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"backend ids must be unique: {ids}")
        for kind in BackendKind:
            prios = [b.priority for b in self.backends if b.kind is kind]
            if len(set(prios)) != len(prios):
                raise ConfigError(f"{kind.value} backend priorities must be unique: {prios}")
        if not self.ocr_backends:
            raise ConfigError("at least one OCR backend is required")
        n_sent = sum(b.kind is BackendKind.SENTIMENT for b in self.backends)
        if n_sent != 1:
            raise ConfigError(f"exactly one sentiment backend is required, got {n_sent}")
        if any(b.is_mock and b.mock_dir is None for b in self.ocr_backends) and self.mock_corpus is None:
            raise ConfigError("mock OCR backends need --mock-corpus")

    def echo(self) -> dict:
        """Resolved settings for the run summary. Output location is omitted."""
        return {
            "input_dir": str(self.input_dir),
            "dpi": self.dpi,
            "weights": asdict(self.weights),
            "threshold": self.threshold,
            "preprocess": asdict(self.preprocess),
            "ocr_params": asdict(self.ocr_params),
            "backends": [
                {"id": b.backend_id, "kind": b.kind.value, "endpoint": b.endpoint,
                 "priority": b.priority, "timeout_ms": b.timeout_ms}
                for b in self.backends
            ],
            "anomaly_cutoff": self.anomaly_cutoff,
            "keep_intermediates": self.keep_intermediates,
            "mock_corpus": str(self.mock_corpus) if self.mock_corpus is not None else None,
            "entropy_precision": self.entropy_precision,
        }


def _parse_backend(entry: dict) -> BackendDescriptor:
    try:
        return BackendDescriptor(
            backend_id=str(entry["id"]),
            endpoint=str(entry["endpoint"]),
            kind=BackendKind(entry["kind"]),
            priority=int(entry.get("priority", 0)),
            timeout_ms=int(entry.get("timeout_ms", 30000)),
            max_chars=int(entry.get("max_chars", 512)),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad backend entry {entry!r}: {exc}") from exc


def parse_backend_flag(flag: str, kind: BackendKind, priority: int) -> BackendDescriptor:
    """``id=url`` from the command line."""
    bid, sep, endpoint = flag.partition("=")
    if not sep or not bid or not endpoint:
        raise ConfigError(f"backend flag must look like id=url, got {flag!r}")
    return BackendDescriptor(bid, endpoint, kind, priority=priority)


def load_config(input_dir, out_dir, config_file=None, **overrides) -> PipelineConfig:
    """Merge a JSON config file with explicit overrides (which win).

    ``overrides`` take the PipelineConfig field names; ``None`` values are
    ignored so unset CLI flags fall through to the file.
    """
    data: dict = {}
    if config_file is not None:
        try:
            data = json.loads(Path(config_file).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {config_file}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")

    try:
        kwargs: dict = {}
        if "dpi" in data:
            kwargs["dpi"] = int(data["dpi"])
        if "weights" in data:
            kwargs["weights"] = StressWeights(**data["weights"])
        if "threshold" in data:
            kwargs["threshold"] = float(data["threshold"])
        if "preprocess" in data:
            kwargs["preprocess"] = PreprocessConfig(**data["preprocess"])
        if "ocr_params" in data:
            kwargs["ocr_params"] = OcrParams(**data["ocr_params"])
        if "anomaly_cutoff" in data:
            kwargs["anomaly_cutoff"] = float(data["anomaly_cutoff"])
        if "workers" in data:
            kwargs["workers"] = int(data["workers"])
        for key in ("keep_intermediates", "record_timing"):
            if key in data:
                kwargs[key] = bool(data[key])
        if "entropy_precision" in data:
            kwargs["entropy_precision"] = str(data["entropy_precision"])
        if "mock_corpus" in data:
            kwargs["mock_corpus"] = Path(data["mock_corpus"])
        if "backends" in data:
            kwargs["backends"] = [_parse_backend(e) for e in data["backends"]]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc

    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("ocr_backends", "sentiment_backends"):
            kind = BackendKind.OCR if key == "ocr_backends" else BackendKind.SENTIMENT
            kept = [b for b in kwargs.get("backends", []) if b.kind is not kind]
            kwargs["backends"] = kept + list(value)
        else:
            kwargs[key] = value
    try:
        return PipelineConfig(input_dir=input_dir, out_dir=out_dir, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class _PageOutcome:
    label: str
    record: PageStressRecord | None = None
    text: str = ""
    warnings: list[str] = field(default_factory=list)
    error: str | None = None


def _process_page(page: PageImage, cfg: PipelineConfig, client: BackendClient,
                  inter_dir: Path | None) -> _PageOutcome:
    out = _PageOutcome(page.label)
    try:
        mask = preprocess_page(page, cfg.preprocess)
        if inter_dir is not None:
            save_page_png(page, inter_dir)
            Image.fromarray(mask_to_gray(mask)).save(inter_dir / f"{page.label}_bin.png", format="PNG")

        candidates = []
        for backend in cfg.ocr_backends:
            try:
                candidates.append(client.ocr_recognize(backend, mask, cfg.ocr_params,
                                                       label=page.label, dpi=page.dpi))
            except (BackendUnavailable, BackendProtocolError) as exc:
                out.warnings.append(f"{page.label}: {exc}")
        if not candidates:
            raise PageError(page.label, "no OCR backend produced a transcription")
        result = vote(candidates, {b.backend_id: b.priority for b in cfg.ocr_backends})
        out.text = result.selected.text
        if inter_dir is not None:
            (inter_dir / f"{page.label}.txt").write_text(out.text, encoding="utf-8")

        scores = client.sentiment_classify(cfg.sentiment_backend, out.text)
        out.record = build_record(page.label, scores, cfg.weights, _PRECISIONS[cfg.entropy_precision])
        emit_page_json(out.record, cfg.out_dir)
    except PageError as exc:
        out.error = str(exc)
    except (BackendUnavailable, BackendProtocolError, OSError, ValueError) as exc:
        out.error = f"{page.label}: {exc}"
    if out.error:
        logger.error(out.error)
    return out


def _page_accuracy(input_dir: Path, label: str, text: str) -> dict | None:
    gt = input_dir / f"{label}{GROUND_TRUTH_SUFFIX}"
    if not gt.is_file():
        return None
    reference = gt.read_text(encoding="utf-8")
    return {
        "char_accuracy": analytics.char_accuracy(reference, text),
        "word_accuracy": analytics.word_accuracy(reference, text),
    }


def run_pipeline(cfg: PipelineConfig, client: BackendClient | None = None) -> tuple[RunSummary, int]:
    """Run every discovered script through the full chain and write all outputs."""
    started = time.perf_counter()
    summary = RunSummary()
    try:
        cfg.validate()
        sources, warnings = discover_inputs(cfg.input_dir)
    except (ConfigError, InputError) as exc:
        logger.error("%s", exc)
        summary.errors.append(str(exc))
        return summary, EXIT_FATAL
    summary.config_echo = cfg.echo()
    summary.warnings.extend(warnings)
    if not sources:
        summary.warnings.append(f"no input documents found in {cfg.input_dir}")
        logger.warning(summary.warnings[-1])

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    inter_dir = None
    if cfg.keep_intermediates:
        inter_dir = cfg.out_dir / "intermediates"
        inter_dir.mkdir(exist_ok=True)

    own_client = client is None
    if own_client:
        client = BackendClient(mock_corpus=cfg.mock_corpus)
    accuracy_rows = []
    try:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            for src in sources:
                try:
                    pages = rasterize_document(src, cfg.dpi)
                except PageError as exc:
                    logger.error("%s", exc)
                    summary.errors.append(str(exc))
                    continue
                # map() keeps page order regardless of completion order
                outcomes = list(pool.map(lambda p: _process_page(p, cfg, client, inter_dir), pages))
                records, page_acc = [], []
                for page, oc in zip(pages, outcomes):
                    summary.warnings.extend(oc.warnings)
                    if oc.error:
                        summary.errors.append(oc.error)
                        continue
                    records.append(oc.record)
                    acc = _page_accuracy(cfg.input_dir, oc.label, oc.text)
                    if acc is not None:
                        page_acc.append({"page_index": page.page_index, **acc})
                if not records:
                    continue
                series = analytics.aggregate_student(records, cfg.anomaly_cutoff)
                extra = {"accuracy": page_acc} if page_acc else None
                emit_plot_series(series, cfg.out_dir, cfg.threshold, extra)
                summary.students.append(series)
                summary.pages_total += len(series.records)
                accuracy_rows.extend(page_acc)
    finally:
        if own_client:
            client.close()

    if accuracy_rows:
        summary.accuracy = {
            "pages_evaluated": len(accuracy_rows),
            "char_accuracy": float(np.mean([r["char_accuracy"] for r in accuracy_rows])),
            "word_accuracy": float(np.mean([r["word_accuracy"] for r in accuracy_rows])),
        }
    summary.wall_seconds = time.perf_counter() - started
    summary.throughput = analytics.throughput(summary.pages_total, max(summary.wall_seconds, 1e-9))
    emit_run_summary(summary, cfg.out_dir, include_timing=cfg.record_timing)
    return summary, EXIT_PARTIAL if summary.errors else EXIT_OK
