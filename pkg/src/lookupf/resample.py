"""Deterministic image resampling (bilinear and nearest-neighbor).

Both functions use the half-pixel-center convention: output pixel i maps
to source coordinate (i + 0.5) * in / out - 0.5, clamped to the valid
range. Implemented as pure numpy so results are bit-reproducible across
platforms and thread counts.
"""

from __future__ import annotations

import numpy as np

__all__ = ["resize_bilinear", "resize_nearest"]


def _source_grid(out_size: int, in_size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (lo index, hi index, fraction) arrays for one axis."""
    coords = (np.arange(out_size, dtype=np.float64) + 0.5) * (in_size / out_size) - 0.5
    coords = np.clip(coords, 0.0, in_size - 1.0)
    lo = np.floor(coords).astype(np.int64)
    lo = np.minimum(lo, in_size - 1)
    hi = np.minimum(lo + 1, in_size - 1)
    frac = coords - lo
    return lo, hi, frac


def resize_bilinear(arr: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample of a (h, w) or (h, w, c) array to (out_h, out_w).

    Returns float64. Uses the lerp form a + t * (b - a), which maps
    constant inputs to bit-identical constant outputs.
    """
    if out_h < 1 or out_w < 1:
        raise ValueError(f"output size must be positive, got {out_h}x{out_w}")
    src = np.asarray(arr, dtype=np.float64)
    in_h, in_w = src.shape[0], src.shape[1]
    y_lo, y_hi, fy = _source_grid(out_h, in_h)
    x_lo, x_hi, fx = _source_grid(out_w, in_w)

    top = src[y_lo][:, x_lo]
    bottom = src[y_hi][:, x_lo]
    top_r = src[y_lo][:, x_hi]
    bottom_r = src[y_hi][:, x_hi]
    if src.ndim == 3:
        fy_col = fy[:, None, None]
        fx_row = fx[None, :, None]
    else:
        fy_col = fy[:, None]
        fx_row = fx[None, :]
    left = top + fy_col * (bottom - top)
    right = top_r + fy_col * (bottom_r - top_r)
    return left + fx_row * (right - left)


def resize_nearest(arr: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Nearest-neighbor resample; preserves dtype and exact sample values."""
    if out_h < 1 or out_w < 1:
        raise ValueError(f"output size must be positive, got {out_h}x{out_w}")
    src = np.asarray(arr)
    in_h, in_w = src.shape[0], src.shape[1]
    ys = np.minimum(
        np.floor((np.arange(out_h, dtype=np.float64) + 0.5) * (in_h / out_h)).astype(np.int64),
        in_h - 1,
    )
    xs = np.minimum(
        np.floor((np.arange(out_w, dtype=np.float64) + 0.5) * (in_w / out_w)).astype(np.int64),
        in_w - 1,
    )
    return src[ys][:, xs]
