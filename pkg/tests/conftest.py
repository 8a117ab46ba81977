from __future__ import annotations

import numpy as np
import pytest

from lookupf.core import ImageBuffer
from lookupf.datagen import item_rng, synth_object_card, synth_scene


@pytest.fixture(scope="session")
def corpus20() -> list[ImageBuffer]:
    """Twenty seeded procedural images: 16 busy scenes, 4 object cards."""
    images = []
    for i in range(20):
        rng = item_rng(99, f"fix_{i:02d}")
        if i % 5 == 4:
            px, _mask = synth_object_card(rng, 96, 96)
        else:
            px = synth_scene(rng, 96, 96)
        images.append(ImageBuffer(id=f"fix_{i:02d}", pixels=px))
    return images


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
