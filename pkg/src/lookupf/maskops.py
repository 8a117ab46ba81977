"""Binary-mask processing: binarization, connected components, segments.

Segment extraction turns a predicted (or ground-truth) forgery mask into
cropped query regions for local retrieval; forgery_proportion feeds the
proportion-bucket analysis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .core import BinaryMask, ImageBuffer, Segment, validate_pair
from .errors import NotSingleChannel

__all__ = [
    "ComponentLabeling",
    "binarize_mask",
    "connected_components",
    "extract_segments",
    "forgery_proportion",
    "save_segment",
]

DEFAULT_THRESHOLD = 128
DEFAULT_CONNECTIVITY = 8
DEFAULT_MIN_AREA_FRACTION = 0.001
DEFAULT_MAX_SEGMENTS = 8

_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.uint8)
_STRUCTURE_8 = np.ones((3, 3), dtype=np.uint8)


@dataclass(frozen=True)
class ComponentLabeling:
    """Per-pixel component ids (0 = background), labeled in raster order.

    Labels run 1..component_count in order of first raster-scan encounter;
    component_areas[i] is the pixel count of label i+1.
    """

    labels: np.ndarray
    component_count: int
    component_areas: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", np.ascontiguousarray(self.labels))
        self.labels.setflags(write=False)


def binarize_mask(gray: ImageBuffer, threshold: int = DEFAULT_THRESHOLD) -> BinaryMask:
    """Threshold a single-channel image: bit = 1 iff sample >= threshold."""
    if gray.channels != 1:
        raise NotSingleChannel(f"expected 1 channel, got {gray.channels}")
    return BinaryMask((gray.pixels >= threshold).astype(np.uint8))


def connected_components(mask: BinaryMask, connectivity: int = DEFAULT_CONNECTIVITY) -> ComponentLabeling:
    """Label foreground components with 4- or 8-connectivity.

    Label order is deterministic: component 1 is the first encountered in
    a raster scan, and so on.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    structure = _STRUCTURE_4 if connectivity == 4 else _STRUCTURE_8
    raw, count = ndimage.label(mask.bits, structure=structure)
    if count == 0:
        return ComponentLabeling(np.zeros_like(mask.bits, dtype=np.int32), 0, ())

    # Relabel by first raster-scan encounter so label order is a contract,
    # not an implementation detail of scipy.
    flat = raw.ravel()
    first_seen = np.full(count + 1, flat.size, dtype=np.int64)
    idx = np.flatnonzero(flat)
    # reversed so earlier positions overwrite later ones
    first_seen[flat[idx[::-1]]] = idx[::-1]
    order = np.argsort(first_seen[1:], kind="stable")  # old label - 1, by encounter
    remap = np.zeros(count + 1, dtype=np.int32)
    remap[order + 1] = np.arange(1, count + 1, dtype=np.int32)
    labels = remap[raw]
    areas = np.bincount(labels.ravel(), minlength=count + 1)[1:]
    return ComponentLabeling(labels, count, tuple(int(a) for a in areas))


def extract_segments(
    img: ImageBuffer,
    mask: BinaryMask,
    min_area_fraction: float = DEFAULT_MIN_AREA_FRACTION,
    max_segments: int = DEFAULT_MAX_SEGMENTS,
    connectivity: int = DEFAULT_CONNECTIVITY,
) -> list[Segment]:
    """Cut each sufficiently large connected forged region out of ``img``.

    Components with area >= min_area_fraction * w * h survive; output is
    ordered by area descending (ties by first-encounter label) and
    truncated to max_segments. Each segment's box is the component's
    tight bounding box and its mask_crop contains only that component's
    bits.
    """
    validate_pair(img, mask)
    labeling = connected_components(mask, connectivity)
    min_area = min_area_fraction * mask.width * mask.height
    keep = [
        (area, label)
        for label, area in enumerate(labeling.component_areas, start=1)
        if area >= min_area
    ]
    keep.sort(key=lambda t: (-t[0], t[1]))
    keep = keep[:max_segments]

    segments = []
    slices = ndimage.find_objects(labeling.labels)
    for ordinal, (area, label) in enumerate(keep):
        sl = slices[label - 1]
        ys, xs = sl[0], sl[1]
        x, y = int(xs.start), int(ys.start)
        w, h = int(xs.stop - xs.start), int(ys.stop - ys.start)
        crop_bits = (labeling.labels[sl] == label).astype(np.uint8)
        crop_pixels = img.pixels[ys, xs] if img.channels == 1 else img.pixels[ys, xs, :]
        segments.append(
            Segment(
                box=(x, y, w, h),
                mask_crop=BinaryMask(crop_bits),
                area=int(area),
                parent_id=img.id,
                index=ordinal,
                image_crop=ImageBuffer(crop_pixels, id=f"{img.id}#seg{ordinal}"),
            )
        )
    return segments


def forgery_proportion(mask: BinaryMask) -> float:
    """Fraction of forged pixels: set-bit count / (w * h)."""
    return mask.area / (mask.width * mask.height)


def save_segment(seg: Segment, directory: str | Path, stem: str) -> None:
    """Write one segment as <stem>.png plus a <stem>.json sidecar."""
    from .imgio import save_image  # local import: imgio pulls in PIL

    directory = Path(directory)
    save_image(seg.image_crop, directory / f"{stem}.png")
    sidecar = {
        "area": seg.area,
        "box": list(seg.box),
        "index": seg.index,
        "parent_id": seg.parent_id,
    }
    (directory / f"{stem}.json").write_text(json.dumps(sidecar, sort_keys=True, indent=2) + "\n")
