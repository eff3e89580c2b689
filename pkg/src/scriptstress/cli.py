"""Command line entry point: ``scriptstress analyze <input_dir> --out <dir>``."""

from __future__ import annotations

import argparse
import logging
import sys

from .backends import BackendKind
from .errors import ConfigError
from .pipeline import EXIT_FATAL, load_config, parse_backend_flag, run_pipeline


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scriptstress",
                                     description="Stress index estimation for scanned answer scripts.")
    sub = parser.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analyze", help="process a directory of scripts")
    an.add_argument("input_dir")
    an.add_argument("--out", required=True, help="output directory")
    an.add_argument("--dpi", type=int, default=None, help="rasterization resolution (default 300)")
    an.add_argument("--config", default=None, help="JSON config file; flags override it")
    an.add_argument("--keep-intermediates", action="store_true", default=None,
                    help="also write page PNGs, binarized masks and selected transcripts")
    an.add_argument("--threshold", type=float, default=None, help="high-stress cutoff (default 0.30)")
    an.add_argument("--ocr-backend", action="append", default=None, metavar="ID=URL",
                    help="OCR backend; repeat for several, earlier flags win ties")
    an.add_argument("--sentiment-backend", default=None, metavar="ID=URL")
    an.add_argument("--mock-corpus", default=None, help="fixture directory for mock backends")
    an.add_argument("--workers", type=int, default=None, help="pages processed concurrently")
    an.add_argument("--timing", action="store_true", default=None,
                    help="record wall time and img/s in run_summary.json")
    an.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        ocr = None
        if args.ocr_backend:
            ocr = [parse_backend_flag(f, BackendKind.OCR, i) for i, f in enumerate(args.ocr_backend)]
        sentiment = None
        if args.sentiment_backend:
            sentiment = [parse_backend_flag(args.sentiment_backend, BackendKind.SENTIMENT, 0)]
        cfg = load_config(
            args.input_dir, args.out, args.config,
            dpi=args.dpi, threshold=args.threshold, keep_intermediates=args.keep_intermediates,
            mock_corpus=args.mock_corpus, workers=args.workers, record_timing=args.timing,
            ocr_backends=ocr, sentiment_backends=sentiment,
        )
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL

    summary, code = run_pipeline(cfg)
    for err in summary.errors:
        print(f"error: {err}", file=sys.stderr)
    rate = f"{summary.throughput:.2f}" if summary.throughput is not None else "n/a"
    print(f"{summary.pages_total} pages from {len(summary.students)} students, "
          f"{len(summary.errors)} errors, {rate} img/s -> {cfg.out_dir}")
    return code


if __name__ == "__main__":
    sys.exit(main())
