#!/usr/bin/env python3
"""Recompute accuracy/precision/recall for the ten-process validation
benchmark (confusion matrices from a user study of choreography-model
validation) and print them as CSV, followed by the column means.

Run: python scripts/metrics_benchmark.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from chorgate import ConfusionMatrix, compute_metrics, percent  # noqa: E402

# (process, #requirements, #valid paths, #invalid paths, (TP, FN, FP, TN))
BENCHMARK_ROWS = [
    ("Replenish inputs", 3, 12, 1, (9, 3, 0, 1)),
    ("Create new market space", 5, 21, 5, (17, 4, 3, 2)),
    ("Optimize the supply chain", 6, 16, 2, (10, 6, 2, 0)),
    ("Manage raw material inventory", 3, 7, 0, (5, 2, 0, 0)),
    ("Recycle and manage product returns", 4, 11, 5, (6, 5, 3, 2)),
    ("Forecast demand with suppliers", 4, 9, 4, (4, 5, 1, 3)),
    ("Collect sales data at POS", 2, 5, 3, (3, 2, 0, 3)),
    ("Hire human resources", 6, 18, 12, (16, 2, 4, 8)),
    ("Pay employee", 3, 8, 5, (6, 2, 2, 3)),
    ("Manage risk by outsourcing", 4, 11, 3, (7, 4, 3, 0)),
]


def benchmark_percents():
    """[(process, accuracy%, precision%, recall%)] for every benchmark row."""
    out = []
    for process, _, _, _, (tp, fn, fp, tn) in BENCHMARK_ROWS:
        metrics = compute_metrics(ConfusionMatrix(tp=tp, fn=fn, fp=fp, tn=tn))
        out.append((process, percent(metrics.accuracy), percent(metrics.precision), percent(metrics.recall)))
    return out


def main() -> int:
    rows = benchmark_percents()
    print("process,requirements,valid_paths,invalid_paths,tp,fn,fp,tn,accuracy,precision,recall")
    for (process, reqs, valid, invalid, (tp, fn, fp, tn)), (_, acc, prec, rec) in zip(BENCHMARK_ROWS, rows):
        print(f"{process},{reqs},{valid},{invalid},{tp},{fn},{fp},{tn},{acc}%,{prec}%,{rec}%")
    n = len(rows)
    mean_acc = sum(r[1] for r in rows) / n
    mean_prec = sum(r[2] for r in rows) / n
    mean_rec = sum(r[3] for r in rows) / n
    print(f"(mean),,,,,,,,{mean_acc:.1f}%,{mean_prec:.1f}%,{mean_rec:.1f}%")
    return 0


if __name__ == "__main__":
    sys.exit(main())
