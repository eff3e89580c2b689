"""OCR and sentiment backends.

Real models run out of process and are reached over HTTP/JSON:

    POST <endpoint>/ocr        {"image": <base64 PNG>, "dpi": int,
                                "params": {"beam_width": int, "max_tokens": int}}
                            -> {"text": str, "confidence": float}
    POST <endpoint>/sentiment  {"text": str}
                            -> {"negative": float, "neutral": float, "positive": float}

An endpoint of ``"mock"`` (or ``"mock:<dir>"``) selects the in-process test
doubles: fixture-file OCR and lexicon-counting sentiment.
"""

from __future__ import annotations

import base64
import enum
import hashlib
import io
import json
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import httpx
import numpy as np
from PIL import Image

from .errors import BackendProtocolError, BackendUnavailable
from .ingestion import PageImage
from .preprocess import mask_to_gray

logger = logging.getLogger(__name__)

SUM_TOLERANCE = 1e-6
DEFAULT_CHUNK_CHARS = 512
DEFAULT_MOCK_CONFIDENCE = 0.9


class BackendKind(str, enum.Enum):
    OCR = "ocr"
    SENTIMENT = "sentiment"


@dataclass(frozen=True)
class BackendDescriptor:
    backend_id: str
    endpoint: str
    kind: BackendKind
    priority: int = 0
    timeout_ms: int = 30000
    max_chars: int = DEFAULT_CHUNK_CHARS

    def __post_init__(self):
        object.__setattr__(self, "kind", BackendKind(self.kind))
        if not self.backend_id:
            raise ValueError("backend_id must be non-empty")
        if self.priority < 0:
            raise ValueError("priority must be >= 0")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        if self.max_chars < 1:
            raise ValueError("max_chars must be positive")

    @property
    def is_mock(self) -> bool:
        return self.endpoint == "mock" or self.endpoint.startswith("mock:")

    @property
    def mock_dir(self) -> Path | None:
        if self.endpoint.startswith("mock:"):
            return Path(self.endpoint[len("mock:"):])
        return None


@dataclass(frozen=True)
class OcrParams:
    beam_width: int = 4
    max_tokens: int = 256

    def __post_init__(self):
        if self.beam_width < 1 or self.max_tokens < 1:
            raise ValueError("beam_width and max_tokens must be >= 1")

    def to_json(self) -> dict:
        return {"beam_width": self.beam_width, "max_tokens": self.max_tokens}


@dataclass(frozen=True)
class OcrCandidate:
    backend_id: str
    text: str
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class SentimentScores:
    negative: float
    neutral: float
    positive: float

    def __post_init__(self):
        for v in self.as_tuple():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"sentiment component {v} outside [0, 1]")
        if abs(sum(self.as_tuple()) - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"sentiment {self.as_tuple()} does not sum to 1")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.negative, self.neutral, self.positive)

    def to_json(self) -> dict:
        return {"negative": self.negative, "neutral": self.neutral, "positive": self.positive}

    @classmethod
    def normalized(cls, negative: float, neutral: float, positive: float) -> "SentimentScores":
        """Divide by the sum; the raw values must already be within 1e-6 of a distribution."""
        raw = (negative, neutral, positive)
        if any(not math.isfinite(v) or v < 0.0 for v in raw):
            raise BackendProtocolError(f"invalid sentiment values {raw}")
        total = math.fsum(raw)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise BackendProtocolError(f"sentiment sums to {total!r}, expected 1")
        return cls(*(min(v / total, 1.0) for v in raw))


NEUTRAL = SentimentScores(0.0, 1.0, 0.0)


# -- mock backends ---------------------------------------------------------


def image_digest(image: np.ndarray) -> str:
    arr = np.ascontiguousarray(image)
    h = hashlib.sha256()
    h.update(f"{arr.dtype.str}{arr.shape}".encode())
    h.update(arr.tobytes())
    return h.hexdigest()


def mock_ocr(corpus_dir, label: str, image: np.ndarray | None = None,
             backend_id: str = "mock") -> OcrCandidate:
    """Fixture-file OCR.

    Looks up ``<label>.txt`` (then ``<sha256 of image>.txt``) in ``corpus_dir``;
    confidence comes from ``<key>.conf`` or defaults to 0.9. A blank mask
    reads as ``("", 1.0)`` and a miss as ``("", 0.0)``.
    """
    if image is not None and image.dtype == bool and not image.any():
        return OcrCandidate(backend_id, "", 1.0)
    keys = [label]
    if image is not None:
        keys.append(image_digest(image))
    root = Path(corpus_dir) if corpus_dir is not None else None
    for key in keys:
        if root is None:
            break
        txt = root / f"{key}.txt"
        if not txt.is_file():
            continue
        text = txt.read_text(encoding="utf-8")
        conf = DEFAULT_MOCK_CONFIDENCE
        conf_path = root / f"{key}.conf"
        if conf_path.is_file():
            conf = _clamp_confidence(float(conf_path.read_text().strip()), backend_id)
        return OcrCandidate(backend_id, text, conf)
    return OcrCandidate(backend_id, "", 0.0)


_TOKEN_RE = re.compile(r"[\w']+")


@dataclass(frozen=True)
class Lexicon:
    negative: frozenset = field(default_factory=frozenset)
    positive: frozenset = field(default_factory=frozenset)

    @classmethod
    def from_words(cls, negative: Iterable[str], positive: Iterable[str]) -> "Lexicon":
        return cls(frozenset(w.lower() for w in negative), frozenset(w.lower() for w in positive))

    @classmethod
    def load(cls, path) -> "Lexicon":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_words(data.get("negative", []), data.get("positive", []))

    @classmethod
    def default(cls) -> "Lexicon":
        return cls.load(Path(__file__).with_name("data") / "lexicon.json")


def mock_sentiment(text: str, lexicon: Lexicon) -> SentimentScores:
    """Laplace-smoothed lexicon counts: neg (n+1)/(n+p+3), pos (p+1)/(n+p+3)."""
    tokens = _TOKEN_RE.findall(text.lower())
    n = sum(t in lexicon.negative for t in tokens)
    p = sum(t in lexicon.positive for t in tokens)
    denom = n + p + 3
    negative = (n + 1) / denom
    positive = (p + 1) / denom
    return SentimentScores(negative, 1.0 - negative - positive, positive)


# -- wire client -----------------------------------------------------------


def encode_png(image: np.ndarray) -> bytes:
    if image.dtype == bool:
        image = mask_to_gray(image)
    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(image)).save(buf, format="PNG")
    return buf.getvalue()


def _clamp_confidence(value: float, backend_id: str) -> float:
    if not math.isfinite(value):
        raise BackendProtocolError(f"{backend_id}: non-finite confidence")
    if value < 0.0 or value > 1.0:
        logger.warning("backend %s reported confidence %r, clamping to [0, 1]", backend_id, value)
        return min(max(value, 0.0), 1.0)
    return value


def split_sentences(text: str, limit: int = DEFAULT_CHUNK_CHARS) -> list[str]:
    """Pack whole sentences into chunks of at most ``limit`` characters.

    A single sentence longer than ``limit`` is cut at word boundaries where
    possible, otherwise hard-cut.
    """
    sentences = [s for s in re.split(r"(?<=[.!?])\s+|\n{2,}", text.strip()) if s.strip()]
    pieces: list[str] = []
    for s in sentences:
        s = s.strip()
        while len(s) > limit:
            cut = s.rfind(" ", 0, limit + 1)
            if cut <= 0:
                cut = limit
            pieces.append(s[:cut].strip())
            s = s[cut:].strip()
        if s:
            pieces.append(s)

    chunks: list[str] = []
    current = ""
    for piece in pieces:
        candidate = f"{current} {piece}" if current else piece
        if len(candidate) <= limit:
            current = candidate
        else:
            chunks.append(current)
            current = piece
    if current:
        chunks.append(current)
    return chunks


def mean_scores(scores: Iterable[SentimentScores]) -> SentimentScores:
    """Component-wise mean, renormalized."""
    arr = np.array([s.as_tuple() for s in scores], dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no scores to average")
    return SentimentScores.normalized(*arr.mean(axis=0).tolist())


class BackendClient:
    """Speaks the OCR/sentiment wire protocol, or dispatches to mocks.

    ``transport`` is handed to ``httpx.Client`` and lets tests substitute a
    canned server.
    """

    def __init__(self, mock_corpus=None, lexicon: Lexicon | None = None,
                 transport: httpx.BaseTransport | None = None):
        self.mock_corpus = Path(mock_corpus) if mock_corpus is not None else None
        self._lexicon = lexicon
        self._transport = transport
        self._http = httpx.Client(transport=transport) if transport is not None else httpx.Client()

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @property
    def lexicon(self) -> Lexicon:
        if self._lexicon is None:
            path = self.mock_corpus / "lexicon.json" if self.mock_corpus else None
            self._lexicon = Lexicon.load(path) if path and path.is_file() else Lexicon.default()
        return self._lexicon

    def _post(self, backend: BackendDescriptor, route: str, body: dict) -> dict:
        url = backend.endpoint.rstrip("/") + route
        try:
            resp = self._http.post(url, json=body, timeout=backend.timeout_ms / 1000.0)
            resp.raise_for_status()
            payload = resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise BackendUnavailable(backend.backend_id, str(exc) or type(exc).__name__) from exc
        if not isinstance(payload, dict):
            raise BackendUnavailable(backend.backend_id, "response is not a JSON object")
        return payload

    def ocr_recognize(self, backend: BackendDescriptor, page: PageImage | np.ndarray,
                      params: OcrParams = OcrParams(), label: str | None = None,
                      dpi: int | None = None) -> OcrCandidate:
        if backend.kind is not BackendKind.OCR:
            raise ValueError(f"{backend.backend_id} is not an OCR backend")
        image = page.pixels if isinstance(page, PageImage) else np.asarray(page)
        if image.size == 0:
            raise ValueError("empty image")
        if isinstance(page, PageImage):
            label = label or page.label
            dpi = dpi or page.dpi

        if backend.is_mock:
            corpus = backend.mock_dir or self.mock_corpus
            return mock_ocr(corpus, label or "", image, backend.backend_id)

        body = {
            "image": base64.b64encode(encode_png(image)).decode("ascii"),
            "dpi": int(dpi) if dpi is not None else 0,
            "params": params.to_json(),
        }
        payload = self._post(backend, "/ocr", body)
        text, conf = payload.get("text"), payload.get("confidence")
        if not isinstance(text, str) or isinstance(conf, bool) or not isinstance(conf, (int, float)):
            raise BackendUnavailable(backend.backend_id, f"malformed OCR response {payload!r:.200}")
        return OcrCandidate(backend.backend_id, text, _clamp_confidence(float(conf), backend.backend_id))

    def _classify_once(self, backend: BackendDescriptor, text: str) -> SentimentScores:
        payload = self._post(backend, "/sentiment", {"text": text})
        try:
            raw = [float(payload[k]) for k in ("negative", "neutral", "positive")]
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendUnavailable(backend.backend_id, f"malformed sentiment response {payload!r:.200}") from exc
        return SentimentScores.normalized(*raw)

    def sentiment_classify(self, backend: BackendDescriptor, text: str) -> SentimentScores:
        """Sentiment triple for ``text``.

        Blank text is exactly neutral and never reaches the backend. Text longer
        than ``backend.max_chars`` is classified sentence-chunk by chunk and
        the triples averaged.
        """
        if backend.kind is not BackendKind.SENTIMENT:
            raise ValueError(f"{backend.backend_id} is not a sentiment backend")
        if not text.strip():
            return NEUTRAL
        if backend.is_mock:
            lexicon = self.lexicon
            if backend.mock_dir is not None:
                lexicon = Lexicon.load(backend.mock_dir / "lexicon.json")
            return mock_sentiment(text, lexicon)
        if len(text) <= backend.max_chars:
            return self._classify_once(backend, text)
        chunks = split_sentences(text, backend.max_chars)
        return mean_scores(self._classify_once(backend, c) for c in chunks)

