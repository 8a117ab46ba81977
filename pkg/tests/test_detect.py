from __future__ import annotations

import json

import numpy as np
import pytest

from lookupf.core import BinaryMask, ForgeryType, ImageBuffer
from lookupf.datagen import ForgeryRecipe, generate_copy_move
from lookupf.detect import (
    DetectorSuite,
    MASKABLE_TYPES,
    block_match_copy_move,
    baseline_suite,
    oracle_suite,
    predict_forgery,
    predict_forgery_mask,
    predict_forgery_type,
)
from lookupf.errors import InvalidParams, MissingLabel, UnsupportedType
from lookupf.imgio import save_mask


def stub_suite(score=0.9, type_scores=None, bits=None, threshold=0.5):
    type_scores = type_scores or {t: 0.0 for t in ForgeryType}

    def mask_pred(img, t):
        b = bits if bits is not None else np.ones((img.height, img.width), np.uint8)
        return BinaryMask(bits=b)

    return DetectorSuite(
        name="stub",
        forgery_scorer=lambda img: score,
        type_scorer=lambda img: dict(type_scores),
        mask_predictor=mask_pred,
        threshold=threshold,
    )


def plain(h=12, w=12):
    return ImageBuffer(pixels=np.full((h, w, 3), 128, np.uint8), id="img")


class TestFlagAndType:
    def test_flag_threshold_inclusive(self):
        img = plain()
        assert predict_forgery(stub_suite(score=0.5), img) == (True, 0.5)
        assert predict_forgery(stub_suite(score=0.4999), img) == (False, 0.4999)

    def test_type_argmax(self):
        scores = {
            ForgeryType.CopyMove: 0.1,
            ForgeryType.ImageSplicing: 0.7,
            ForgeryType.ObjectRemoval: 0.3,
            ForgeryType.Colorization: 0.2,
        }
        assert predict_forgery_type(stub_suite(type_scores=scores), plain()) is ForgeryType.ImageSplicing

    def test_type_tie_breaks_by_declaration_order(self):
        scores = {t: 1.0 for t in ForgeryType}
        assert predict_forgery_type(stub_suite(type_scores=scores), plain()) is ForgeryType.CopyMove
        scores[ForgeryType.CopyMove] = 0.0
        assert predict_forgery_type(stub_suite(type_scores=scores), plain()) is ForgeryType.ImageSplicing

    def test_type_rejects_non_finite(self):
        scores = {t: 0.0 for t in ForgeryType}
        scores[ForgeryType.CopyMove] = float("nan")
        with pytest.raises(InvalidParams):
            predict_forgery_type(stub_suite(type_scores=scores), plain())


class TestMaskPrediction:
    def test_maskable_types_only(self):
        img = plain()
        suite = stub_suite()
        for t in MASKABLE_TYPES:
            mask = predict_forgery_mask(suite, img, t)
            assert mask.area == img.height * img.width
        for t in (ForgeryType.ObjectRemoval, ForgeryType.Colorization):
            with pytest.raises(UnsupportedType):
                predict_forgery_mask(suite, img, t)

    def test_mask_shape_validated(self):
        img = plain(10, 12)
        bad = stub_suite(bits=np.ones((3, 3), np.uint8))
        with pytest.raises(Exception):
            predict_forgery_mask(bad, img, ForgeryType.CopyMove)


class TestBlockMatcher:
    def scene(self):
        rng = np.random.default_rng(6)
        px = rng.integers(0, 256, (96, 96, 3), np.uint8)
        return ImageBuffer(pixels=px, id="noise")

    def test_finds_planted_duplicate(self):
        src = self.scene()
        bits = np.zeros((96, 96), np.uint8)
        bits[8:40, 8:40] = 1
        recipe = ForgeryRecipe(
            kind=ForgeryType.CopyMove, source_id="noise",
            object_mask=BinaryMask(bits=bits), placement=(48, 48), scale=1.0, alpha=1.0,
        )
        forged, gt_mask = generate_copy_move(src, recipe)
        found = block_match_copy_move(forged)
        # both the source and destination footprints carry duplicated blocks
        overlap = (found.bits & gt_mask.bits).sum()
        assert found.area > 0
        assert overlap / gt_mask.area > 0.5

    def test_clean_noise_has_no_matches(self):
        assert block_match_copy_move(self.scene()).area == 0

    def test_flat_image_guard(self):
        flat = ImageBuffer(pixels=np.full((64, 64, 3), 77, np.uint8), id="flat")
        assert block_match_copy_move(flat).area == 0

    def test_param_validation(self):
        img = self.scene()
        with pytest.raises(InvalidParams):
            block_match_copy_move(img, block=0)
        with pytest.raises(InvalidParams):
            block_match_copy_move(img, stride=0)
        with pytest.raises(InvalidParams):
            block_match_copy_move(img, block=200)
        with pytest.raises(InvalidParams):
            block_match_copy_move(img, max_dist=-1.0)


class TestOracleSuite:
    def write_labels(self, root, img, forged=True, ftype="copy-move", with_mask=True):
        entry = {"forged": forged, "type": ftype if forged else None, "mask": None}
        if forged and with_mask:
            bits = np.zeros((img.height, img.width), np.uint8)
            bits[2:6, 3:9] = 1
            (root / "masks").mkdir(exist_ok=True)
            save_mask(BinaryMask(bits=bits), root / "masks" / f"{img.id}.png")
            entry["mask"] = f"masks/{img.id}.png"
        (root / f"{img.id}.json").write_text(json.dumps(entry))

    def test_reads_sidecar(self, tmp_path):
        img = plain()
        self.write_labels(tmp_path, img)
        suite = oracle_suite(tmp_path)
        flagged, score = predict_forgery(suite, img)
        assert flagged and score == 1.0
        assert predict_forgery_type(suite, img) is ForgeryType.CopyMove
        mask = predict_forgery_mask(suite, img, ForgeryType.CopyMove)
        assert mask.area == 24

    def test_authentic_sidecar(self, tmp_path):
        img = plain()
        self.write_labels(tmp_path, img, forged=False)
        suite = oracle_suite(tmp_path)
        flagged, score = predict_forgery(suite, img)
        assert not flagged and score == 0.0

    def test_missing_sidecar_raises(self, tmp_path):
        suite = oracle_suite(tmp_path)
        with pytest.raises(MissingLabel):
            predict_forgery(suite, plain())

    def test_missing_mask_field_raises(self, tmp_path):
        img = plain()
        self.write_labels(tmp_path, img, with_mask=False)
        suite = oracle_suite(tmp_path)
        with pytest.raises(MissingLabel):
            predict_forgery_mask(suite, img, ForgeryType.CopyMove)


class TestBaselineSuite:
    def test_scores_in_range_and_types_finite(self, corpus20):
        suite = baseline_suite()
        for img in corpus20[:4]:
            _, score = predict_forgery(suite, img)
            assert 0.0 <= score <= 1.0
            scores = suite.type_scorer(img)
            assert set(scores) == set(ForgeryType)
            assert all(np.isfinite(v) for v in scores.values())

    def test_mask_predictor_returns_valid_mask(self, corpus20):
        suite = baseline_suite()
        img = corpus20[0]
        for t in MASKABLE_TYPES:
            mask = predict_forgery_mask(suite, img, t)
            assert (mask.height, mask.width) == (img.height, img.width)
