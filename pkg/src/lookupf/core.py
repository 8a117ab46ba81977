"""Shared domain types: images, masks, forgery types, candidates, reports.

All types are immutable after construction and validate their own
invariants, so they can be shared freely across worker threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, UnknownForgeryType

__all__ = [
    "ImageBuffer",
    "BinaryMask",
    "ForgeryType",
    "Segment",
    "Provenance",
    "MatchCandidate",
    "VerificationReport",
    "GroundTruthTable",
    "parse_forgery_type",
    "validate_pair",
]


def _lock(arr: np.ndarray) -> np.ndarray:
    """Return a C-contiguous read-only view-copy of ``arr``."""
    out = np.ascontiguousarray(arr)
    if out is arr:
        out = arr.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ImageBuffer:
    """Decoded 8-bit raster image, 1 (luminance) or 3 (RGB) channels.

    ``pixels`` has shape (height, width) for single-channel images and
    (height, width, 3) for RGB; dtype is always uint8 and the array is
    read-only.
    """

    pixels: np.ndarray
    id: str = ""

    def __post_init__(self) -> None:
        arr = np.asarray(self.pixels)
        if arr.dtype != np.uint8:
            raise ValueError(f"pixels must be uint8, got {arr.dtype}")
        if arr.ndim == 3 and arr.shape[2] == 1:
            arr = arr[:, :, 0]
        if arr.ndim == 2:
            pass
        elif arr.ndim == 3 and arr.shape[2] == 3:
            pass
        else:
            raise ValueError(f"pixels must be (h, w) or (h, w, 3), got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        object.__setattr__(self, "pixels", _lock(arr))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    def luminance(self) -> np.ndarray:
        """Float64 luminance plane in [0, 255] (BT.601 weights for RGB)."""
        if self.channels == 1:
            return self.pixels.astype(np.float64)
        p = self.pixels.astype(np.float64)
        return 0.299 * p[:, :, 0] + 0.587 * p[:, :, 1] + 0.114 * p[:, :, 2]

    def with_id(self, new_id: str) -> "ImageBuffer":
        return ImageBuffer(self.pixels, id=new_id)


@dataclass(frozen=True)
class BinaryMask:
    """Per-pixel forgery annotation: 1 = forged, 0 = pristine.

    ``bits`` is a read-only uint8 array of shape (height, width) holding
    only 0/1 values.
    """

    bits: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.bits)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("mask must be at least 1x1")
        if arr.dtype == np.bool_:
            arr = arr.astype(np.uint8)
        if arr.dtype != np.uint8:
            raise ValueError(f"mask bits must be uint8 or bool, got {arr.dtype}")
        if arr.max(initial=0) > 1:
            raise ValueError("mask bits must be 0 or 1")
        object.__setattr__(self, "bits", _lock(arr))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def area(self) -> int:
        """Number of forged (set) pixels."""
        return int(self.bits.sum())


class ForgeryType(enum.Enum):
    """Closed enumeration of the supported forgery kinds."""

    CopyMove = "copy-move"
    ImageSplicing = "image-splicing"
    ObjectRemoval = "object-removal"
    Colorization = "colorization"

    @property
    def canonical(self) -> str:
        return self.value


_FORGERY_SPELLINGS = {
    "copy-move": ForgeryType.CopyMove,
    "image-splicing": ForgeryType.ImageSplicing,
    "image splicing": ForgeryType.ImageSplicing,
    "object-removal": ForgeryType.ObjectRemoval,
    "inpainting": ForgeryType.ObjectRemoval,
    "colorization": ForgeryType.Colorization,
}


def parse_forgery_type(s: str) -> ForgeryType:
    """Parse a forgery-type token (case-insensitive, accepted aliases only)."""
    try:
        return _FORGERY_SPELLINGS[s.strip().lower()]
    except KeyError:
        raise UnknownForgeryType(f"unknown forgery type: {s!r}") from None


def validate_pair(img: ImageBuffer, mask: BinaryMask) -> None:
    """Raise DimensionMismatch unless image and mask dimensions agree."""
    if (img.height, img.width) != (mask.height, mask.width):
        raise DimensionMismatch(
            f"image is {img.width}x{img.height}, mask is {mask.width}x{mask.height}"
        )


@dataclass(frozen=True)
class Segment:
    """One connected forged region cut out of its parent image.

    ``box`` is (x, y, w, h) in parent-image pixels; ``mask_crop`` holds
    only this component's bits restricted to the box; ``image_crop`` is
    the parent's pixels under the same box, kept so the segment can be
    used directly as a retrieval query.
    """

    box: tuple[int, int, int, int]
    mask_crop: BinaryMask
    area: int
    parent_id: str
    index: int
    image_crop: ImageBuffer

    def __post_init__(self) -> None:
        x, y, w, h = self.box
        if w < 1 or h < 1 or x < 0 or y < 0:
            raise ValueError(f"invalid segment box {self.box}")
        if (self.mask_crop.width, self.mask_crop.height) != (w, h):
            raise ValueError("mask_crop does not match box size")
        if (self.image_crop.width, self.image_crop.height) != (w, h):
            raise ValueError("image_crop does not match box size")
        if self.area != self.mask_crop.area:
            raise ValueError("area must equal the mask_crop bit count")
        if self.index < 0:
            raise ValueError("segment index must be >= 0")


@dataclass(frozen=True)
class Provenance:
    """Where a match candidate came from: whole-image or segment retrieval."""

    kind: str  # "global" | "local"
    segment_index: int | None = None

    def __post_init__(self) -> None:
        if self.kind == "global":
            if self.segment_index is not None:
                raise ValueError("global provenance carries no segment index")
        elif self.kind == "local":
            if self.segment_index is None or self.segment_index < 0:
                raise ValueError("local provenance needs a valid segment index")
        else:
            raise ValueError(f"unknown provenance kind {self.kind!r}")

    @staticmethod
    def global_() -> "Provenance":
        return Provenance("global")

    @staticmethod
    def local(segment_index: int) -> "Provenance":
        return Provenance("local", segment_index)


@dataclass(frozen=True)
class MatchCandidate:
    """(reference id, confidence, provenance); higher confidence = better."""

    reference_id: str
    confidence: float
    provenance: Provenance

    def __post_init__(self) -> None:
        if not np.isfinite(self.confidence):
            raise ValueError("candidate confidence must be finite")


@dataclass(frozen=True)
class VerificationReport:
    """Final verdict for one query: authenticity, forgery details, candidates.

    Authentic reports carry no forgery type, no mask, and no candidates;
    forged reports carry candidates sorted by confidence descending with
    unique reference ids.
    """

    query_id: str
    authentic: bool
    forgery_type: ForgeryType | None = None
    forgery_mask: BinaryMask | None = None
    candidates: tuple[MatchCandidate, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if self.authentic:
            if self.forgery_type is not None or self.forgery_mask is not None:
                raise ValueError("authentic report cannot carry forgery details")
            if self.candidates:
                raise ValueError("authentic report cannot carry candidates")
        confs = [c.confidence for c in self.candidates]
        if any(a < b for a, b in zip(confs, confs[1:])):
            raise ValueError("candidates must be sorted by confidence descending")
        ids = [c.reference_id for c in self.candidates]
        if len(ids) != len(set(ids)):
            raise ValueError("candidates must not repeat a reference id")


@dataclass(frozen=True)
class GroundTruthTable:
    """query id -> set of true original reference ids (0, 1, or 2 each)."""

    pairs: dict[str, frozenset[str]]

    def __post_init__(self) -> None:
        frozen = {}
        for qid, refs in self.pairs.items():
            refs = frozenset(refs)
            if len(refs) > 2:
                raise ValueError(f"query {qid!r} maps to more than 2 reference ids")
            frozen[qid] = refs
        object.__setattr__(self, "pairs", frozen)

    @property
    def positive_pairs(self) -> set[tuple[str, str]]:
        return {(q, r) for q, refs in self.pairs.items() for r in refs}

    def originals_of(self, query_id: str) -> frozenset[str]:
        return self.pairs.get(query_id, frozenset())
