"""Combine transcripts from several OCR engines by confidence vote."""

from __future__ import annotations

from scriptstress import OcrCandidate, edit_distance, similarity, vote

ROUNDS = [
    [OcrCandidate("trocr", "the cell wall is rigid", 0.91),
     OcrCandidate("tesseract", "the ce11 wall is rigid", 0.74),
     OcrCandidate("paddle", "the cell wal is rigid", 0.88)],
    # three-way confidence tie; texts that agree with the others win
    [OcrCandidate("A", "aaa", 0.8), OcrCandidate("B", "aab", 0.8), OcrCandidate("C", "aaa", 0.8)],
    # identical texts at equal confidence: any of them is correct, priority picks the reporter
    [OcrCandidate("x", "mitosis", 0.5), OcrCandidate("y", "mitosis", 0.5)],
]


def main():
    print("edit_distance('kitten', 'sitting') =", edit_distance("kitten", "sitting"))
    print("similarity('kitten', 'sitting') = %.4f" % similarity("kitten", "sitting"))
    for cands in ROUNDS:
        prio = {c.backend_id: i for i, c in enumerate(cands)}
        res = vote(cands, prio)
        print(f"\n{len(cands)} candidates -> {res.selected.backend_id}: {res.selected.text!r} ({res.method.value})")


if __name__ == "__main__":
    main()
