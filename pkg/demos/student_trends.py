"""Page-by-page stress for one student: anomalies, clusters and correlation."""

from __future__ import annotations

import numpy as np

from scriptstress import SentimentScores, aggregate_student, build_record


def main(seed: int = 3):
    rng = np.random.default_rng(seed)
    neg = np.clip(0.25 + rng.normal(0, 0.03, 10), 0.02, 0.9)
    neg[6] = 0.92  # one page written in a panic
    records = [build_record(f"student7_page_{i}", SentimentScores(n, 0.95 - n, 0.05))
               for i, n in enumerate(neg, 1)]
    series = aggregate_student(records)

    print(f"student {series.student_id}: {len(series.records)} pages, mean stress {series.mean_stress:.4f}")
    for page, rec in zip(series.page_indices, series.records):
        bar = "#" * int(rec.stress_index * 60)
        print(f"  page {page:2d}  {rec.stress_index:.4f}  {series.clusters[page].value:12s} {bar}")
    print("anomalous pages:", [(p, round(z, 2)) for p, z in series.anomalies])
    print("r(negative, stress) = %.4f" % series.neg_stress_r)


if __name__ == "__main__":
    main()
