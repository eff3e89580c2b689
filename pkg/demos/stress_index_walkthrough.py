"""Score a handful of sentiment triples and show how the index responds.

Run: python demos/stress_index_walkthrough.py
"""

from __future__ import annotations

import numpy as np

from scriptstress import SentimentScores, build_record, classify_stress, shannon_entropy

TRIPLES = {
    "mostly neutral (recorded model output)": (0.05230807140469551, 0.8731970191001892, 0.07449495047330856),
    "pure negative": (1.0, 0.0, 0.0),
    "pure neutral": (0.0, 1.0, 0.0),
    "pure positive": (0.0, 0.0, 1.0),
    "uniform": (1 / 3, 1 / 3, 1 / 3),
    "anxious": (0.55, 0.35, 0.10),
}


def main():
    print(f"{'case':42s} {'H (nats)':>10s} {'S':>10s}  level")
    for name, triple in TRIPLES.items():
        rec = build_record("demo_page_1", SentimentScores(*triple))
        print(f"{name:42s} {rec.entropy:10.6f} {rec.stress_index:10.6f}  {classify_stress(rec.stress_index).value}")

    # Model outputs are float32; computing the entropy in float32 reproduces
    # their logged values bit for bit.
    s = SentimentScores(*TRIPLES["mostly neutral (recorded model output)"])
    print("\nentropy float64:", repr(shannon_entropy(s)))
    print("entropy float32:", repr(shannon_entropy(s, np.float32)))


if __name__ == "__main__":
    main()
