"""Forgery identification: pluggable detector suites.

A DetectorSuite bundles the three predictors the pipeline needs (forged
flag, forgery type, forgery mask) behind plain callables, so trained
models, classical baselines, and label oracles are interchangeable. The
oracle suite reads ground-truth JSON sidecars and is the reference
implementation for pipeline and evaluation tests; the built-in baseline
is deliberately classical and its accuracy is not a contract.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .core import BinaryMask, ForgeryType, ImageBuffer, parse_forgery_type, validate_pair
from .errors import InvalidParams, MissingLabel, UnsupportedType
from .imgio import load_mask

__all__ = [
    "DetectorSuite",
    "predict_forgery",
    "predict_forgery_type",
    "predict_forgery_mask",
    "block_match_copy_move",
    "oracle_suite",
    "baseline_suite",
    "MASKABLE_TYPES",
]

# Only these types have a meaningful region to segment; for the others
# the identification stage reports mask = None.
MASKABLE_TYPES = (ForgeryType.CopyMove, ForgeryType.ImageSplicing)

DEFAULT_FLAG_THRESHOLD = 0.5

# Blocks whose mean-removed pixel variance falls below this are excluded
# from block matching; uniform regions would otherwise self-match everywhere.
FLAT_BLOCK_VARIANCE = 1e-3


@dataclass(frozen=True)
class DetectorSuite:
    """Three predictors plus the binary decision threshold.

    forgery_scorer maps an image to a forgery score in [0, 1];
    type_scorer returns finite per-class scores (predicted class is the
    argmax, ties broken by enum declaration order); mask_predictor
    localizes the forged region for the maskable types.
    """

    name: str
    forgery_scorer: Callable[[ImageBuffer], float]
    type_scorer: Callable[[ImageBuffer], dict[ForgeryType, float]]
    mask_predictor: Callable[[ImageBuffer, ForgeryType], BinaryMask]
    threshold: float = DEFAULT_FLAG_THRESHOLD
    thread_safe: bool = True


def predict_forgery(suite: DetectorSuite, img: ImageBuffer) -> tuple[bool, float]:
    """Binary authenticity decision: flag = (score >= suite.threshold)."""
    score = float(suite.forgery_scorer(img))
    return score >= suite.threshold, score


def predict_forgery_type(suite: DetectorSuite, img: ImageBuffer) -> ForgeryType:
    """Argmax over per-class scores; ties break by enum declaration order."""
    scores = suite.type_scorer(img)
    best: ForgeryType | None = None
    best_score = -np.inf
    for t in ForgeryType:  # declaration order fixes tie-breaking
        s = float(scores.get(t, -np.inf))
        if not np.isfinite(s) and t in scores:
            raise InvalidParams(f"non-finite score for class {t.canonical}")
        if s > best_score:
            best, best_score = t, s
    assert best is not None
    return best


def predict_forgery_mask(suite: DetectorSuite, img: ImageBuffer, t: ForgeryType) -> BinaryMask:
    """Localize the forged region; only copy-move and splicing have one."""
    if t not in MASKABLE_TYPES:
        raise UnsupportedType(f"no segmentation defined for {t.canonical}")
    mask = suite.mask_predictor(img, t)
    validate_pair(img, mask)
    return mask


# --- block-matching copy-move baseline ------------------------------------


def block_match_copy_move(
    img: ImageBuffer,
    block: int = 16,
    stride: int = 8,
    max_dist: float = 2.0,
) -> BinaryMask:
    """Classical copy-move localizer: match mean-removed pixel blocks.

    Slides block x block windows at the given stride, drops flat windows
    (variance < FLAT_BLOCK_VARIANCE), and marks every pair of
    non-overlapping windows whose root-mean-square difference is at most
    max_dist (8-bit intensity units). Returns the union of all marked
    windows; dimensions always equal the input's.
    """
    if block < 1 or stride < 1:
        raise InvalidParams(f"block and stride must be >= 1, got {block}, {stride}")
    if block > min(img.width, img.height):
        raise InvalidParams(
            f"block {block} exceeds image extent {img.width}x{img.height}"
        )
    if max_dist < 0:
        raise InvalidParams(f"max_dist must be >= 0, got {max_dist}")

    lum = img.luminance()
    ys = list(range(0, img.height - block + 1, stride))
    xs = list(range(0, img.width - block + 1, stride))
    positions: list[tuple[int, int]] = []
    feats: list[np.ndarray] = []
    for y in ys:
        for x in xs:
            win = lum[y : y + block, x : x + block].ravel()
            centered = win - win.mean()
            if centered.var() < FLAT_BLOCK_VARIANCE:
                continue
            positions.append((y, x))
            feats.append(centered)

    bits = np.zeros((img.height, img.width), dtype=np.uint8)
    if len(feats) >= 2:
        f = np.stack(feats)
        sq = np.einsum("ij,ij->i", f, f)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (f @ f.T)
        rms = np.sqrt(np.maximum(d2, 0.0) / (block * block))
        pos = np.array(positions)
        dy = np.abs(pos[:, 0][:, None] - pos[:, 0][None, :])
        dx = np.abs(pos[:, 1][:, None] - pos[:, 1][None, :])
        disjoint = (dy >= block) | (dx >= block)
        ia, ib = np.nonzero(np.triu(disjoint & (rms <= max_dist), k=1))
        for i in np.concatenate([ia, ib]):
            y, x = positions[int(i)]
            bits[y : y + block, x : x + block] = 1
    return BinaryMask(bits)


# --- residual / color statistics used by the baseline suite ---------------


def _box_blur3(lum: np.ndarray) -> np.ndarray:
    padded = np.pad(lum, 1, mode="edge")
    acc = np.zeros_like(lum, dtype=np.float64)
    for dy in range(3):
        for dx in range(3):
            acc += padded[dy : dy + lum.shape[0], dx : dx + lum.shape[1]]
    return acc / 9.0


def _residual_fraction(img: ImageBuffer, edge: float = 20.0) -> float:
    """Fraction of pixels whose high-frequency residual exceeds ``edge``.

    Hard paste boundaries raise this; it is the score behind both the
    forged flag and the splicing channel of the baseline suite.
    """
    lum = img.luminance()
    residual = np.abs(lum - _box_blur3(lum))
    return float(np.mean(residual > edge))


def _saturation_mean(img: ImageBuffer) -> float:
    if img.channels == 1:
        return 0.0
    px = img.pixels.astype(np.float64)
    return float(np.mean(px.max(axis=2) - px.min(axis=2)) / 255.0)


def _smooth_block_fraction(img: ImageBuffer, cell: int = 8, var_lo: float = 2.0) -> float:
    lum = img.luminance()
    h = (img.height // cell) * cell
    w = (img.width // cell) * cell
    if h == 0 or w == 0:
        return 0.0
    blocks = lum[:h, :w].reshape(h // cell, cell, w // cell, cell)
    variances = blocks.var(axis=(1, 3))
    return float(np.mean(variances < var_lo))


# --- suite constructors -----------------------------------------------------


def oracle_suite(labels_dir: str | Path) -> DetectorSuite:
    """Ground-truth passthrough suite fed by JSON sidecars.

    Each image id resolves to <labels_dir>/<id>.json holding
    {"forged": bool, "type": string|null, "mask": relative-path|null};
    mask paths are relative to the sidecar's directory.
    """
    root = Path(labels_dir)

    def sidecar(img: ImageBuffer) -> dict:
        path = root / f"{img.id}.json"
        if not path.is_file():
            raise MissingLabel(f"no sidecar for image id {img.id!r} at {path}")
        return json.loads(path.read_text())

    def score(img: ImageBuffer) -> float:
        return 1.0 if sidecar(img).get("forged") else 0.0

    def type_scores(img: ImageBuffer) -> dict[ForgeryType, float]:
        label = sidecar(img).get("type")
        if label is None:
            raise MissingLabel(f"sidecar for {img.id!r} has no forgery type")
        t = parse_forgery_type(label)
        return {v: (1.0 if v is t else 0.0) for v in ForgeryType}

    def mask(img: ImageBuffer, t: ForgeryType) -> BinaryMask:
        rel = sidecar(img).get("mask")
        if rel is None:
            raise MissingLabel(f"sidecar for {img.id!r} has no mask path")
        return load_mask(root / rel)

    return DetectorSuite(
        name="oracle",
        forgery_scorer=score,
        type_scorer=type_scores,
        mask_predictor=mask,
    )


def baseline_suite() -> DetectorSuite:
    """Classical no-training baselines.

    Forged flag: high-frequency residual fraction. Type scores: block
    matching for copy-move, residual for splicing, smooth-region
    fraction for object removal, inverse saturation for colorization.
    Masks: block matcher for copy-move, thresholded residual for
    splicing. Accuracy is indicative only.
    """

    def score(img: ImageBuffer) -> float:
        return min(1.0, _residual_fraction(img) * 4.0)

    def type_scores(img: ImageBuffer) -> dict[ForgeryType, float]:
        cm_mask = block_match_copy_move(img)
        return {
            ForgeryType.CopyMove: min(1.0, 20.0 * cm_mask.area / (img.width * img.height)),
            ForgeryType.ImageSplicing: min(1.0, _residual_fraction(img) * 4.0),
            ForgeryType.ObjectRemoval: _smooth_block_fraction(img),
            ForgeryType.Colorization: 1.0 - min(1.0, _saturation_mean(img) * 4.0),
        }

    def mask(img: ImageBuffer, t: ForgeryType) -> BinaryMask:
        if t is ForgeryType.CopyMove:
            return block_match_copy_move(img)
        lum = img.luminance()
        residual = np.abs(lum - _box_blur3(lum))
        return BinaryMask((residual > 20.0).astype(np.uint8))

    return DetectorSuite(
        name="baseline",
        forgery_scorer=score,
        type_scorer=type_scores,
        mask_predictor=mask,
    )
