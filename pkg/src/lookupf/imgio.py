"""Image and mask file I/O (PNG/JPEG via Pillow).

Image ids are file stems; 16-bit sources are down-converted to 8 bits at
decode time; alpha channels are dropped.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image

from .core import BinaryMask, ImageBuffer

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")


def load_image(path: str | os.PathLike, id: str | None = None) -> ImageBuffer:
    """Decode a PNG/JPEG file into an ImageBuffer (id defaults to the stem)."""
    p = Path(path)
    with Image.open(p) as im:
        if im.mode in ("1", "L"):
            arr = np.asarray(im.convert("L"))
        elif im.mode in ("I;16", "I;16B", "I;16L", "I"):
            # deep grayscale (PNG stores at most 16 bits): keep the top byte
            arr = (np.asarray(im.convert("I"), dtype=np.int32) >> 8).astype(np.uint8)
        elif im.mode == "F":
            arr = np.clip(np.asarray(im), 0, 255).astype(np.uint8)
        elif im.mode == "RGB":
            arr = np.asarray(im)
        else:
            arr = np.asarray(im.convert("RGB"))
    return ImageBuffer(arr, id=id if id is not None else p.stem)


def save_image(img: ImageBuffer, path: str | os.PathLike) -> None:
    """Write an ImageBuffer as PNG or JPEG depending on the extension."""
    Image.fromarray(img.pixels).save(Path(path))


def load_mask(path: str | os.PathLike, threshold: int = 128) -> BinaryMask:
    """Load a single-channel PNG as a BinaryMask (sample >= threshold -> 1)."""
    with Image.open(Path(path)) as im:
        arr = np.asarray(im.convert("L"))
    return BinaryMask((arr >= threshold).astype(np.uint8))


def save_mask(mask: BinaryMask, path: str | os.PathLike) -> None:
    """Write a BinaryMask as an 8-bit PNG with values {0, 255}."""
    Image.fromarray((mask.bits * 255).astype(np.uint8)).save(Path(path))


def list_image_files(directory: str | os.PathLike) -> list[Path]:
    """Image files directly under ``directory``, sorted by name."""
    d = Path(directory)
    return sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS)


def load_corpus(directory: str | os.PathLike) -> list[ImageBuffer]:
    """Load every image in a directory, ids = file stems, sorted by name."""
    return [load_image(p) for p in list_image_files(directory)]
