"""Rasterize a synthetic scanned page and run the binarization chain.

Writes the grey page and the cleaned ink mask as PNGs so they can be
compared side by side.

Run: python demos/binarize_page.py [out_dir]
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

import numpy as np
import pymupdf
from PIL import Image

from scriptstress import PreprocessConfig, otsu_threshold, preprocess_page, rasterize_document, to_grayscale
from scriptstress.ingestion import DocumentSource, SourceKind
from scriptstress.preprocess import mask_to_gray, stretch_contrast


def make_script(path: Path) -> None:
    doc = pymupdf.open()
    page = doc.new_page(width=420, height=300)
    page.draw_rect(page.rect, color=None, fill=(0.93, 0.92, 0.88))  # yellowed paper
    page.insert_text((40, 80), "Q1. Explain osmosis.", fontsize=16)
    page.insert_text((40, 130), "water moves across the membrane...", fontsize=14, color=(0.2, 0.2, 0.5))
    page.draw_line((40, 150), (330, 158), width=1.5)
    doc.save(path)
    doc.close()


def main(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    pdf = out_dir / "demo.pdf"
    make_script(pdf)
    (page,) = rasterize_document(DocumentSource(pdf, "demo", SourceKind.PDF), dpi=150)
    print(f"page {page.label}: {page.width_px}x{page.height_px} px, {page.channels} channels")

    gray = stretch_contrast(to_grayscale(page))
    print("otsu threshold:", otsu_threshold(gray))
    for cfg in (PreprocessConfig(median_kernel=1, dilation_iterations=0), PreprocessConfig()):
        mask = preprocess_page(page, cfg)
        print(f"median={cfg.median_kernel} dilation={cfg.dilation_iterations}: ink fraction {mask.mean():.4f}")

    Image.fromarray(gray).save(out_dir / "demo_gray.png")
    Image.fromarray(mask_to_gray(mask)).save(out_dir / "demo_mask.png")
    print("wrote", out_dir / "demo_gray.png", "and", out_dir / "demo_mask.png")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="binarize_")))
