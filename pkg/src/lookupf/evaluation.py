"""Retrieval and localization metrics plus their file formats.

The headline retrieval metric is micro-average precision over the
globally ranked pool of (query, reference, score) rows, positives given
by a ground-truth table; companions are recall/threshold at precision
0.9 and per-query recall at rank k. Mask quality uses pixel
precision/recall/F1/IoU and ROC AUC. proportion_buckets slices µAP by
the forged-area fraction of each query.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .core import BinaryMask, GroundTruthTable
from .errors import (
    DegenerateGroundTruth,
    DimensionMismatch,
    EmptyGroundTruth,
    InvalidParams,
    MissingProportion,
)

__all__ = [
    "PredictionRun",
    "RetrievalMetrics",
    "micro_average_precision",
    "recall_at_p90",
    "recall_at_rank",
    "compute_metrics",
    "mask_metrics",
    "pixel_auc",
    "proportion_buckets",
    "read_predictions_csv",
    "write_predictions_csv",
    "read_gt_csv",
    "write_gt_csv",
    "read_proportions_csv",
    "write_proportions_csv",
]

PRECISION_FLOOR = 0.9


@dataclass(frozen=True)
class PredictionRun:
    """All scored (query_id, reference_id, score) rows of one system run."""

    rows: tuple[tuple[str, str, float], ...]
    manifest: str = ""

    def __post_init__(self) -> None:
        rows = tuple((str(q), str(r), float(s)) for q, r, s in self.rows)
        seen: set[tuple[str, str]] = set()
        for q, r, s in rows:
            if not math.isfinite(s):
                raise InvalidParams(f"non-finite score for ({q}, {r}): {s}")
            if (q, r) in seen:
                raise InvalidParams(f"duplicate prediction pair ({q}, {r})")
            seen.add((q, r))
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class RetrievalMetrics:
    micro_ap: float
    recall_at_p90: float
    threshold_at_p90: float | None
    recall_at_rank: dict[int, float] = field(default_factory=dict)


def _sorted_rows(run: PredictionRun) -> list[tuple[str, str, float]]:
    # Global ranking: score descending, then query_id, then reference_id,
    # so ties are deterministic across runs and platforms.
    return sorted(run.rows, key=lambda row: (-row[2], row[0], row[1]))


def _positives(gt: GroundTruthTable) -> set[tuple[str, str]]:
    pairs = gt.positive_pairs
    if not pairs:
        raise EmptyGroundTruth("ground truth has no positive pairs")
    return pairs


def micro_average_precision(run: PredictionRun, gt: GroundTruthTable) -> float:
    """AP over the global ranking: sum of precision-at-correct-rows / P."""
    positives = _positives(gt)
    total = 0.0
    correct = 0
    for i, (q, r, _s) in enumerate(_sorted_rows(run), start=1):
        if (q, r) in positives:
            correct += 1
            total += correct / i
    return total / len(positives)


def recall_at_p90(run: PredictionRun, gt: GroundTruthTable) -> tuple[float, float | None]:
    """Best recall over score-descending prefixes with precision >= 0.9.

    The returned threshold is the score of the last row of the smallest
    maximizing prefix; (0.0, None) when no prefix qualifies.
    """
    positives = _positives(gt)
    n_pos = len(positives)
    best_recall = 0.0
    best_threshold: float | None = None
    correct = 0
    for i, (q, r, s) in enumerate(_sorted_rows(run), start=1):
        if (q, r) in positives:
            correct += 1
        if correct / i >= PRECISION_FLOOR:
            recall = correct / n_pos
            if recall > best_recall:
                best_recall = recall
                best_threshold = s
    return best_recall, best_threshold


def recall_at_rank(run: PredictionRun, gt: GroundTruthTable, k: int) -> float:
    """Fraction of positive pairs found in their query's top-k rows."""
    if k < 1:
        raise InvalidParams(f"k must be >= 1, got {k}")
    positives = _positives(gt)
    by_query: dict[str, list[tuple[str, str, float]]] = {}
    for row in run.rows:
        by_query.setdefault(row[0], []).append(row)
    hits = 0
    for q, r in positives:
        rows = by_query.get(q, [])
        rows.sort(key=lambda row: (-row[2], row[1]))
        if any(ref == r for _q, ref, _s in rows[:k]):
            hits += 1
    return hits / len(positives)


def compute_metrics(run: PredictionRun, gt: GroundTruthTable, ks: tuple[int, ...] = (1, 10)) -> RetrievalMetrics:
    """The standard bundle: µAP, recall/threshold at P90, recall at rank k."""
    recall, threshold = recall_at_p90(run, gt)
    return RetrievalMetrics(
        micro_ap=micro_average_precision(run, gt),
        recall_at_p90=recall,
        threshold_at_p90=threshold,
        recall_at_rank={k: recall_at_rank(run, gt, k) for k in ks},
    )


def mask_metrics(pred: BinaryMask, gt: BinaryMask) -> tuple[float, float, float, float]:
    """Pixel-level (precision, recall, f1, iou).

    Conventions for empty masks: an empty prediction has precision 1
    against an empty ground truth and 0 otherwise (recall analogous);
    IoU of two empty masks is 1; F1 is 0 when both components are 0.
    """
    if (pred.height, pred.width) != (gt.height, gt.width):
        raise DimensionMismatch(
            f"mask {pred.width}x{pred.height} vs ground truth {gt.width}x{gt.height}"
        )
    p = pred.bits.astype(bool)
    g = gt.bits.astype(bool)
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))

    if tp + fp == 0:
        precision = 1.0 if fn == 0 else 0.0
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 1.0 if fp == 0 else 0.0
    else:
        recall = tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    iou = 1.0 if tp + fp + fn == 0 else tp / (tp + fp + fn)
    return precision, recall, f1, iou


def pixel_auc(pred_scores: np.ndarray, gt: BinaryMask) -> float:
    """ROC AUC over pixels via the rank-sum statistic (midranks for ties)."""
    scores = np.asarray(pred_scores, dtype=np.float64)
    if scores.shape != (gt.height, gt.width):
        raise DimensionMismatch(f"scores shape {scores.shape} vs mask {gt.bits.shape}")
    labels = gt.bits.ravel().astype(bool)
    n_pos = int(np.count_nonzero(labels))
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateGroundTruth("AUC needs both forged and clean pixels in the ground truth")
    ranks = rankdata(scores.ravel())
    rank_sum = float(ranks[labels].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _bucket_of(p: float) -> int:
    """Ten proportion buckets: [i/10, (i+1)/10), the last closed at 1.0."""
    if not (0.0 <= p <= 1.0):
        raise InvalidParams(f"proportion out of [0, 1]: {p}")
    if p >= 1.0:
        return 9
    b = min(9, int(p * 10.0))
    # guard against binary-float edge cases near bucket boundaries
    while b > 0 and p < b / 10.0:
        b -= 1
    while b < 9 and p >= (b + 1) / 10.0:
        b += 1
    return b


def proportion_buckets(
    run: PredictionRun,
    gt: GroundTruthTable,
    proportions: dict[str, float],
) -> list[tuple[int, float | None]]:
    """Per-bucket µAP, bucketing queries by forged-area proportion.

    Rows and ground truth are both restricted to each bucket's queries;
    a bucket with no positive pairs reports None. Every scored query
    must have a proportion; ground-truth-only queries without one are
    left out of all buckets.
    """
    for q, _r, _s in run.rows:
        if q not in proportions:
            raise MissingProportion(f"no proportion recorded for scored query {q!r}")

    bucket_queries: dict[int, set[str]] = {i: set() for i in range(10)}
    known = set(q for q, _r, _s in run.rows) | set(gt.pairs)
    for q in known:
        if q in proportions:
            bucket_queries[_bucket_of(proportions[q])].add(q)

    out: list[tuple[int, float | None]] = []
    for i in range(10):
        qs = bucket_queries[i]
        sub_pairs = {q: refs for q, refs in gt.pairs.items() if q in qs and refs}
        if not sub_pairs:
            out.append((i, None))
            continue
        sub_rows = tuple(row for row in run.rows if row[0] in qs)
        sub_run = PredictionRun(rows=sub_rows, manifest=run.manifest)
        out.append((i, micro_average_precision(sub_run, GroundTruthTable(sub_pairs))))
    return out


# --- file formats -----------------------------------------------------------


def write_predictions_csv(path: str | Path, run: PredictionRun) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "reference_id", "score"])
        for q, r, s in run.rows:
            writer.writerow([q, r, repr(s)])


def read_predictions_csv(path: str | Path) -> PredictionRun:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["query_id", "reference_id", "score"]:
            raise InvalidParams(f"{path}: unexpected predictions header {header}")
        rows = tuple((q, r, float(s)) for q, r, s in reader)
    return PredictionRun(rows=rows)


def write_gt_csv(path: str | Path, gt: GroundTruthTable) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "reference_id"])
        for q, r in sorted(gt.positive_pairs):
            writer.writerow([q, r])


def read_gt_csv(path: str | Path) -> GroundTruthTable:
    pairs: dict[str, set[str]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["query_id", "reference_id"]:
            raise InvalidParams(f"{path}: unexpected ground-truth header {header}")
        for q, r in reader:
            pairs.setdefault(q, set()).add(r)
    return GroundTruthTable({q: frozenset(refs) for q, refs in pairs.items()})


def write_proportions_csv(path: str | Path, proportions: dict[str, float]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "proportion"])
        for q in sorted(proportions):
            writer.writerow([q, repr(float(proportions[q]))])


def read_proportions_csv(path: str | Path) -> dict[str, float]:
    out: dict[str, float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["query_id", "proportion"]:
            raise InvalidParams(f"{path}: unexpected proportions header {header}")
        for q, p in reader:
            out[q] = float(p)
    return out
