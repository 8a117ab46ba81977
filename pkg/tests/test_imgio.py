from __future__ import annotations

import numpy as np
import pytest
from PIL import Image

from lookupf.core import BinaryMask, ImageBuffer
from lookupf.imgio import (
    list_image_files,
    load_corpus,
    load_image,
    load_mask,
    save_image,
    save_mask,
)


class TestImageRoundTrip:
    def test_rgb_png_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        img = ImageBuffer(pixels=rng.integers(0, 256, (9, 7, 3), np.uint8), id="x")
        p = tmp_path / "x.png"
        save_image(img, p)
        back = load_image(p)
        assert back.id == "x"
        assert np.array_equal(back.pixels, img.pixels)

    def test_grayscale_round_trip(self, tmp_path):
        img = ImageBuffer(pixels=np.arange(12, dtype=np.uint8).reshape(3, 4), id="g")
        p = tmp_path / "g.png"
        save_image(img, p)
        assert np.array_equal(load_image(p).pixels, img.pixels)

    def test_id_defaults_to_stem(self, tmp_path):
        img = ImageBuffer(pixels=np.zeros((2, 2), np.uint8), id="whatever")
        p = tmp_path / "named_by_file.png"
        save_image(img, p)
        assert load_image(p).id == "named_by_file"
        assert load_image(p, id="forced").id == "forced"

    def test_sixteen_bit_png_downshifted(self, tmp_path):
        p = tmp_path / "deep.png"
        arr16 = (np.array([[0, 256, 65535]], np.uint16))
        Image.fromarray(arr16).save(p)
        back = load_image(p)
        assert back.pixels.dtype == np.uint8
        assert back.pixels.tolist() == [[0, 1, 255]]

    def test_palette_image_converted(self, tmp_path):
        p = tmp_path / "pal.png"
        Image.fromarray(np.arange(9, dtype=np.uint8).reshape(3, 3) * 20, mode="L").convert("P").save(p)
        back = load_image(p)
        assert back.pixels.dtype == np.uint8


class TestMaskRoundTrip:
    def test_mask_saves_as_0_255(self, tmp_path):
        bits = np.array([[1, 0], [0, 1]], np.uint8)
        p = tmp_path / "m.png"
        save_mask(BinaryMask(bits=bits), p)
        raw = np.asarray(Image.open(p))
        assert set(np.unique(raw)) == {0, 255}
        back = load_mask(p)
        assert np.array_equal(back.bits, bits)

    def test_threshold_on_load(self, tmp_path):
        p = tmp_path / "soft.png"
        Image.fromarray(np.array([[0, 127, 128, 255]], np.uint8), mode="L").save(p)
        assert load_mask(p).bits.tolist() == [[0, 0, 1, 1]]


class TestCorpus:
    def test_listing_sorted_and_filtered(self, tmp_path):
        for name in ("b.png", "a.png", "c.txt", "d.jpg"):
            if name.endswith((".png", ".jpg")):
                save_image(ImageBuffer(pixels=np.zeros((2, 2), np.uint8), id="x"), tmp_path / name)
            else:
                (tmp_path / name).write_text("not an image")
        files = list_image_files(tmp_path)
        assert [f.name for f in files] == ["a.png", "b.png", "d.jpg"]
        corpus = load_corpus(tmp_path)
        assert [im.id for im in corpus] == ["a", "b", "d"]

    def test_empty_directory(self, tmp_path):
        assert load_corpus(tmp_path) == []
