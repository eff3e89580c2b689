"""Page cleanup: grayscale, contrast stretch, Otsu binarization, denoise, dilate.

Gray images are 2-D ``uint8`` arrays (0 = ink black, 255 = paper white).
Binary images are 2-D ``bool`` arrays where True marks ink.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import PreprocessError
from .ingestion import PageImage


@dataclass(frozen=True)
class PreprocessConfig:
    contrast_stretch: bool = True
    median_kernel: int = 3
    dilation_kernel: int = 3
    dilation_iterations: int = 1

    def __post_init__(self):
        for name in ("median_kernel", "dilation_kernel"):
            k = getattr(self, name)
            if not isinstance(k, int) or k < 1 or k % 2 == 0:
                raise ValueError(f"{name} must be an odd integer >= 1, got {k!r}")
        if not isinstance(self.dilation_iterations, int) or self.dilation_iterations < 0:
            raise ValueError(f"dilation_iterations must be >= 0, got {self.dilation_iterations!r}")


def to_grayscale(img: PageImage | np.ndarray) -> np.ndarray:
    """Luma conversion, Y = round(0.299 R + 0.587 G + 0.114 B) with halves rounded up."""
    label = img.label if isinstance(img, PageImage) else "<array>"
    px = img.pixels if isinstance(img, PageImage) else np.asarray(img)
    if px.ndim == 2:
        return px.astype(np.uint8, copy=True)
    if px.ndim == 3 and px.shape[2] == 1:
        return px[:, :, 0].astype(np.uint8, copy=True)
    if px.ndim != 3 or px.shape[2] != 3:
        raise PreprocessError(label, f"unsupported channel layout {px.shape}")
    rgb = px.astype(np.int64)
    # integer weights keep the half-up rounding exact
    y = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
    return y.astype(np.uint8)


def stretch_contrast(gray: np.ndarray) -> np.ndarray:
    """Linear min-max stretch onto [0, 255]. Constant images are returned unchanged."""
    gray = np.asarray(gray, dtype=np.uint8)
    lo, hi = int(gray.min()), int(gray.max())
    if lo == hi:
        return gray.copy()
    scaled = ((gray.astype(np.int64) - lo) * 255 * 2 + (hi - lo)) // (2 * (hi - lo))
    return scaled.astype(np.uint8)


def otsu_threshold(gray: np.ndarray) -> int:
    """Otsu's global threshold over the 256-bin histogram.

    Pixels ``<= t`` form the ink class. Between-class variance is compared in
    exact integer arithmetic so that ties go to the smallest ``t``.
    """
    gray = np.asarray(gray)
    if gray.size == 0:
        raise ValueError("empty image")
    hist = np.bincount(gray.ravel().astype(np.int64), minlength=256)[:256]
    n = int(hist.sum())
    total = int(np.dot(hist, np.arange(256, dtype=np.int64)))
    counts = np.cumsum(hist).tolist()
    sums = np.cumsum(hist * np.arange(256, dtype=np.int64)).tolist()

    # sigma_b^2 * n^2 = (n*s0 - n0*total)^2 / (n0*n1); compare num/den by cross-multiplying
    best_t, best_num, best_den = 0, 0, 1
    for t in range(256):
        n0 = counts[t]
        n1 = n - n0
        if n0 == 0 or n1 == 0:
            continue
        num = (n * sums[t] - n0 * total) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def binarize(gray: np.ndarray) -> np.ndarray:
    gray = np.asarray(gray)
    return gray <= otsu_threshold(gray)


def median_filter(mask: np.ndarray, size: int) -> np.ndarray:
    """Binary majority filter over a ``size`` x ``size`` window with replicated borders."""
    mask = np.asarray(mask, dtype=bool)
    if size == 1:
        return mask.copy()
    return ndimage.median_filter(mask.astype(np.uint8), size=size, mode="nearest").astype(bool)


def dilate(mask: np.ndarray, size: int, iterations: int = 1) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    out = mask.copy()
    if size == 1:
        return out
    for _ in range(iterations):
        # scipy treats iterations=0 as "until stable", so loop explicitly
        out = ndimage.grey_dilation(out.astype(np.uint8), size=(size, size), mode="nearest").astype(bool)
    return out


def enhance(mask: np.ndarray, cfg: PreprocessConfig = PreprocessConfig()) -> np.ndarray:
    """Median denoise, then dilate the ink strokes."""
    cleaned = median_filter(mask, cfg.median_kernel)
    return dilate(cleaned, cfg.dilation_kernel, cfg.dilation_iterations)


def preprocess_page(page: PageImage, cfg: PreprocessConfig = PreprocessConfig()) -> np.ndarray:
    """Full chain: grayscale, optional stretch, threshold, median, dilation."""
    gray = to_grayscale(page)
    if cfg.contrast_stretch:
        gray = stretch_contrast(gray)
    return enhance(binarize(gray), cfg)


def mask_to_gray(mask: np.ndarray) -> np.ndarray:
    """Render a mask as a printable page: ink 0, paper 255."""
    return np.where(np.asarray(mask, dtype=bool), 0, 255).astype(np.uint8)
