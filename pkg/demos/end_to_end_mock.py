"""Full batch run against mock backends, no network required.

Builds two synthetic student scripts plus an OCR fixture corpus, runs the
pipeline, and lists what was written.

Run: python demos/end_to_end_mock.py [work_dir]
"""

from __future__ import annotations

import json
import logging
import sys
import tempfile
from pathlib import Path

import pymupdf

from scriptstress import PipelineConfig, run_pipeline

SCRIPTS = {
    "alice": ["I understand this well, the proof is clear.",
              "This part is harder but I am fairly sure.",
              "Running out of time, I can't finish, so stressed."],
    "bob": ["Not sure what the question wants.", "Confused and worried about this one.",
            "Impossible, I give up.", "Easy, the answer is right here."],
}

LEXICON = {
    "negative": ["not", "can't", "confused", "worried", "stressed", "impossible", "harder", "give"],
    "positive": ["understand", "well", "clear", "sure", "easy", "right"],
}


def build_inputs(work: Path) -> tuple[Path, Path]:
    inputs, corpus = work / "inputs", work / "mock"
    inputs.mkdir(parents=True, exist_ok=True)
    corpus.mkdir(exist_ok=True)
    for student, pages in SCRIPTS.items():
        doc = pymupdf.open()
        for i, text in enumerate(pages, 1):
            doc.new_page(width=300, height=400).insert_text((30, 60), text[:30], fontsize=11)
            (corpus / f"{student}_page_{i}.txt").write_text(text)
        doc.save(inputs / f"{student}.pdf")
        doc.close()
    (corpus / "lexicon.json").write_text(json.dumps(LEXICON))
    return inputs, corpus


def main(work: Path) -> int:
    logging.basicConfig(level=logging.WARNING)
    inputs, corpus = build_inputs(work)
    out = work / "out"
    summary, code = run_pipeline(PipelineConfig(inputs, out, dpi=150, mock_corpus=corpus))
    print(f"exit code {code}, {summary.pages_total} pages, {len(summary.errors)} errors")
    for path in sorted(out.iterdir()):
        print("  ", path.name)
    print(json.dumps(json.loads((out / "alice_page_3.json").read_text()), indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="scriptstress_"))))
