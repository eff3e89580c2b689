"""Input discovery and page rasterization.

One input file is one student's script. PDFs are rendered page by page with
PyMuPDF; single raster images pass through as a one-page document.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pymupdf
from PIL import Image

from .errors import DocumentError, InputError

logger = logging.getLogger(__name__)

DEFAULT_DPI = 300
PDF_EXTENSIONS = {".pdf"}
IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".tif", ".tiff"}
GROUND_TRUTH_SUFFIX = ".gt.txt"
_LABEL_SEP = "_page_"


class SourceKind(str, enum.Enum):
    PDF = "pdf"
    IMAGE = "image"


@dataclass(frozen=True)
class DocumentSource:
    path: Path
    student_id: str
    kind: SourceKind

    def __post_init__(self):
        if not self.student_id or "/" in self.student_id or "\\" in self.student_id:
            raise ValueError(f"invalid student id {self.student_id!r}")


@dataclass(frozen=True, eq=False)
class PageImage:
    """A rendered page. ``pixels`` is (H, W) gray or (H, W, 3) RGB uint8, read-only."""

    student_id: str
    page_index: int
    dpi: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.page_index < 1:
            raise ValueError("page_index is 1-based")
        if self.dpi <= 0:
            raise ValueError("dpi must be positive")
        px = np.asarray(self.pixels)
        if px.dtype != np.uint8 or px.ndim not in (2, 3) or px.shape[0] == 0 or px.shape[1] == 0:
            raise ValueError(f"bad raster for {self.label}: {px.dtype} {px.shape}")
        if not px.flags.writeable:
            object.__setattr__(self, "pixels", px)
        else:
            px = px.copy()
            px.setflags(write=False)
            object.__setattr__(self, "pixels", px)

    @property
    def width_px(self) -> int:
        return self.pixels.shape[1]

    @property
    def height_px(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else self.pixels.shape[2]

    @property
    def label(self) -> str:
        return page_label(self.student_id, self.page_index)


def page_label(student_id: str, page_index: int) -> str:
    """Identifier used for every artifact of one page, e.g. ``student0_page_2``."""
    if page_index < 1:
        raise ValueError(f"page_index must be >= 1, got {page_index}")
    return f"{student_id}{_LABEL_SEP}{page_index}"


def source_kind(path: Path) -> SourceKind | None:
    ext = path.suffix.lower()
    if ext in PDF_EXTENSIONS:
        return SourceKind.PDF
    if ext in IMAGE_EXTENSIONS:
        return SourceKind.IMAGE
    return None


def discover_inputs(input_dir) -> tuple[list[DocumentSource], list[str]]:
    """List the scripts in ``input_dir``, sorted by student id.

    Returns the sources and a list of warnings for skipped files. Ground-truth
    transcripts (``*.gt.txt``) are recognised and skipped silently.
    """
    root = Path(input_dir)
    if not root.is_dir():
        raise InputError(f"input directory not found or not a directory: {root}")
    try:
        entries = sorted(p for p in root.iterdir() if p.is_file())
    except OSError as exc:
        raise InputError(f"cannot read input directory {root}: {exc}") from exc

    sources: dict[str, DocumentSource] = {}
    warnings: list[str] = []
    for path in entries:
        if path.name.lower().endswith(GROUND_TRUTH_SUFFIX):
            continue
        kind = source_kind(path)
        if kind is None:
            warnings.append(f"skipping unsupported file {path.name}")
            continue
        student_id = path.stem
        if _LABEL_SEP in student_id:
            warnings.append(f"skipping {path.name}: student id may not contain {_LABEL_SEP!r}")
            continue
        if student_id in sources:
            warnings.append(f"skipping {path.name}: duplicate student id {student_id!r}")
            continue
        sources[student_id] = DocumentSource(path=path, student_id=student_id, kind=kind)

    for w in warnings:
        logger.warning(w)
    return [sources[k] for k in sorted(sources)], warnings


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def page_pixel_size(width_pt: float, height_pt: float, dpi: int) -> tuple[int, int]:
    """Raster size of a page given in PDF points (1/72 inch)."""
    return _round_half_up(width_pt / 72.0 * dpi), _round_half_up(height_pt / 72.0 * dpi)


def _fit(arr: np.ndarray, width: int, height: int) -> np.ndarray:
    # MuPDF may land one pixel off the requested size; crop or pad with white
    arr = arr[:height, :width]
    pad_h, pad_w = height - arr.shape[0], width - arr.shape[1]
    if pad_h or pad_w:
        arr = np.pad(arr, ((0, pad_h), (0, pad_w), (0, 0)), constant_values=255)
    return arr


def _rasterize_pdf(src: DocumentSource, dpi: int) -> list[PageImage]:
    try:
        doc = pymupdf.open(src.path, filetype="pdf")
    except Exception as exc:
        raise DocumentError(src.student_id, f"cannot open PDF {src.path.name}: {exc}") from exc
    with doc:
        if doc.needs_pass or doc.is_encrypted:
            raise DocumentError(src.student_id, f"{src.path.name} is encrypted")
        if doc.page_count == 0:
            raise DocumentError(src.student_id, f"{src.path.name} has no pages")
        pages = []
        for i, page in enumerate(doc, start=1):
            rect = page.rect
            width, height = page_pixel_size(rect.width, rect.height, dpi)
            if width < 1 or height < 1:
                raise DocumentError(src.student_id, f"page {i} of {src.path.name} is empty")
            try:
                pix = page.get_pixmap(
                    matrix=pymupdf.Matrix(width / rect.width, height / rect.height),
                    colorspace=pymupdf.csRGB,
                    alpha=False,
                )
            except Exception as exc:
                raise DocumentError(src.student_id, f"cannot render page {i}: {exc}") from exc
            arr = np.frombuffer(pix.samples, dtype=np.uint8)
            arr = arr.reshape(pix.height, pix.stride)[:, : pix.width * 3]
            arr = _fit(arr.reshape(pix.height, pix.width, 3), width, height)
            pages.append(PageImage(src.student_id, i, dpi, np.ascontiguousarray(arr)))
    return pages


def _load_image(src: DocumentSource, dpi: int) -> list[PageImage]:
    try:
        with Image.open(src.path) as im:
            im.load()
            if im.mode not in ("L", "RGB"):
                im = im.convert("L" if im.mode in ("1", "I", "I;16", "F") else "RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except Exception as exc:
        raise DocumentError(src.student_id, f"cannot decode image {src.path.name}: {exc}") from exc
    return [PageImage(src.student_id, 1, dpi, arr)]


def rasterize_document(src: DocumentSource, dpi: int = DEFAULT_DPI) -> list[PageImage]:
    """Render every page of ``src`` at ``dpi``, in document order.

    Raises DocumentError for corrupt, encrypted or empty documents.
    """
    if dpi <= 0:
        raise ValueError(f"dpi must be positive, got {dpi}")
    if src.kind is SourceKind.PDF:
        return _rasterize_pdf(src, dpi)
    return _load_image(src, dpi)


def save_page_png(page: PageImage, out_dir) -> Path:
    path = Path(out_dir) / f"{page.label}.png"
    Image.fromarray(page.pixels).save(path, format="PNG", dpi=(page.dpi, page.dpi))
    return path
