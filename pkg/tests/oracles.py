"""Independent reference implementations used to check the real ones.

Everything here is written the slow, obvious way on purpose: flood fill
with an explicit queue, full sorts, O(n^2) pair counting. Tests compare
the package's outputs against these, never the other way around.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def flood_fill_components(bits: np.ndarray, connectivity: int = 8):
    """Label connected components by BFS flood fill.

    Labels are assigned in raster-scan order of each component's first
    pixel, starting at 1. Returns (labels array, count, areas list).
    """
    h, w = bits.shape
    labels = np.zeros((h, w), dtype=np.int32)
    if connectivity == 4:
        steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    else:
        steps = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    count = 0
    areas = []
    for y in range(h):
        for x in range(w):
            if bits[y, x] and not labels[y, x]:
                count += 1
                area = 0
                queue = deque([(y, x)])
                labels[y, x] = count
                while queue:
                    cy, cx = queue.popleft()
                    area += 1
                    for dy, dx in steps:
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and bits[ny, nx] and not labels[ny, nx]:
                            labels[ny, nx] = count
                            queue.append((ny, nx))
                areas.append(area)
    return labels, count, areas


def naive_topk(ids, vectors, query, k):
    """Exact top-k by full sort: (euclidean distance, id) ascending."""
    scored = []
    for ident, vec in zip(ids, vectors):
        d = float(np.sqrt(np.sum((np.asarray(vec, dtype=np.float64) - np.asarray(query, dtype=np.float64)) ** 2)))
        scored.append((d, ident))
    scored.sort()
    return scored[:k]


def brute_micro_ap(rows, gt_pairs):
    """Average precision over the globally ranked row pool.

    rows: iterable of (query_id, reference_id, score). Positives are the
    (query_id, reference_id) pairs in gt_pairs; the denominator is the
    total number of ground-truth pairs.
    """
    gt = set(gt_pairs)
    if not gt:
        raise ValueError("empty ground truth")
    ordered = sorted(rows, key=lambda r: (-r[2], r[0], r[1]))
    hits = 0
    total = 0.0
    for i, (q, r, _s) in enumerate(ordered, start=1):
        if (q, r) in gt:
            hits += 1
            total += hits / i
    return total / len(gt)


def brute_recall_at_p90(rows, gt_pairs, floor=0.9):
    """Scan every prefix of the global ranking; keep the best recall with
    precision >= floor, and the score of the last row of the smallest
    prefix achieving it. (0.0, None) if no prefix qualifies."""
    gt = set(gt_pairs)
    if not gt:
        raise ValueError("empty ground truth")
    ordered = sorted(rows, key=lambda r: (-r[2], r[0], r[1]))
    best_recall = 0.0
    best_threshold = None
    hits = 0
    for i, (q, r, s) in enumerate(ordered, start=1):
        if (q, r) in gt:
            hits += 1
        precision = hits / i
        recall = hits / len(gt)
        if precision >= floor and recall > best_recall:
            best_recall = recall
            best_threshold = s
    return best_recall, best_threshold


def brute_recall_at_rank(rows, gt_pairs, k):
    """Fraction of ground-truth pairs found in some query's top-k rows."""
    gt = set(gt_pairs)
    if not gt:
        raise ValueError("empty ground truth")
    by_query: dict[str, list] = {}
    for q, r, s in rows:
        by_query.setdefault(q, []).append((q, r, s))
    found = 0
    for q, qrows in by_query.items():
        qrows.sort(key=lambda row: (-row[2], row[1]))
        for qq, rr, _s in qrows[:k]:
            if (qq, rr) in gt:
                found += 1
    return found / len(gt)


def pair_count_auc(scores, labels):
    """ROC AUC by counting concordant pairs, ties worth 1/2."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    pos = scores[labels]
    neg = scores[~labels]
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("need both classes")
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def circular_filter_spatial(image, transfer):
    """Apply a frequency-domain transfer function by explicit circular
    convolution with its spatial kernel, one np.roll per kernel tap."""
    kernel = np.fft.ifft2(transfer).real
    h, w = image.shape
    out = np.zeros((h, w), dtype=np.float64)
    for dy in range(h):
        for dx in range(w):
            kv = kernel[dy, dx]
            if kv != 0.0:
                out += kv * np.roll(np.roll(image, dy, axis=0), dx, axis=1)
    return out


def subset_micro_ap(rows, gt_pairs, query_ids):
    """Micro AP restricted to a set of query ids (rows and ground truth
    both filtered). None when the subset holds no positives."""
    q = set(query_ids)
    sub_rows = [r for r in rows if r[0] in q]
    sub_gt = {p for p in gt_pairs if p[0] in q}
    if not sub_gt:
        return None
    return brute_micro_ap(sub_rows, sub_gt)
