from __future__ import annotations

import numpy as np
import pytest

from lookupf.core import (
    BinaryMask,
    ForgeryType,
    GroundTruthTable,
    ImageBuffer,
    MatchCandidate,
    Provenance,
    VerificationReport,
    parse_forgery_type,
    validate_pair,
)
from lookupf.errors import DimensionMismatch, UnknownForgeryType


def gray(h=4, w=5, value=7):
    return ImageBuffer(id="g", pixels=np.full((h, w), value, np.uint8))


class TestImageBuffer:
    def test_accepts_gray_and_rgb(self):
        assert gray().channels == 1
        rgb = ImageBuffer(id="c", pixels=np.zeros((3, 4, 3), np.uint8))
        assert (rgb.height, rgb.width, rgb.channels) == (3, 4, 3)

    def test_rejects_bad_dtype_and_shape(self):
        with pytest.raises(ValueError):
            ImageBuffer(id="x", pixels=np.zeros((4, 4), np.float32))
        with pytest.raises(ValueError):
            ImageBuffer(id="x", pixels=np.zeros((4, 4, 4), np.uint8))
        with pytest.raises(ValueError):
            ImageBuffer(id="x", pixels=np.zeros((0, 4), np.uint8))

    def test_pixels_immutable(self):
        img = gray()
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 1

    def test_luminance_grayscale_identity(self):
        img = gray(value=200)
        lum = img.luminance()
        assert lum.dtype == np.float64
        assert np.array_equal(lum, np.full((4, 5), 200.0))

    def test_luminance_bt601_weights(self):
        px = np.zeros((1, 3, 3), np.uint8)
        px[0, 0] = (255, 0, 0)
        px[0, 1] = (0, 255, 0)
        px[0, 2] = (0, 0, 255)
        lum = ImageBuffer(id="w", pixels=px).luminance()
        assert lum[0, 0] == pytest.approx(0.299 * 255)
        assert lum[0, 1] == pytest.approx(0.587 * 255)
        assert lum[0, 2] == pytest.approx(0.114 * 255)

    def test_with_id(self):
        img = gray()
        renamed = img.with_id("other")
        assert renamed.id == "other"
        assert np.array_equal(renamed.pixels, img.pixels)


class TestBinaryMask:
    def test_area_counts_set_bits(self):
        bits = np.zeros((4, 4), np.uint8)
        bits[1:3, 1:3] = 1
        assert BinaryMask(bits=bits).area == 4

    def test_bool_input_accepted(self):
        m = BinaryMask(bits=np.ones((2, 2), bool))
        assert m.area == 4 and m.bits.dtype == np.uint8

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            BinaryMask(bits=np.full((2, 2), 3, np.uint8))

    def test_validate_pair(self):
        img = gray(4, 5)
        validate_pair(img, BinaryMask(bits=np.zeros((4, 5), np.uint8)))
        with pytest.raises(DimensionMismatch):
            validate_pair(img, BinaryMask(bits=np.zeros((5, 4), np.uint8)))


class TestForgeryType:
    def test_canonical_values(self):
        assert ForgeryType.CopyMove.canonical == "copy-move"
        assert ForgeryType.ImageSplicing.canonical == "image-splicing"
        assert ForgeryType.ObjectRemoval.canonical == "object-removal"
        assert ForgeryType.Colorization.canonical == "colorization"

    @pytest.mark.parametrize(
        "token,expected",
        [
            ("copy-move", ForgeryType.CopyMove),
            ("Image Splicing", ForgeryType.ImageSplicing),
            ("image-splicing", ForgeryType.ImageSplicing),
            ("inpainting", ForgeryType.ObjectRemoval),
            ("  colorization ", ForgeryType.Colorization),
        ],
    )
    def test_parse_accepted_spellings(self, token, expected):
        assert parse_forgery_type(token) is expected

    def test_parse_rejects_unknown(self):
        with pytest.raises(UnknownForgeryType):
            parse_forgery_type("watermark")


class TestProvenanceAndCandidates:
    def test_global_carries_no_segment(self):
        p = Provenance.global_()
        assert p.kind == "global" and p.segment_index is None
        with pytest.raises(ValueError):
            Provenance(kind="global", segment_index=0)

    def test_local_requires_index(self):
        assert Provenance.local(2).segment_index == 2
        with pytest.raises(ValueError):
            Provenance(kind="local", segment_index=None)
        with pytest.raises(ValueError):
            Provenance(kind="elsewhere", segment_index=None)

    def test_candidate_rejects_nan(self):
        with pytest.raises(ValueError):
            MatchCandidate(reference_id="r", confidence=float("nan"), provenance=Provenance.global_())


class TestVerificationReport:
    def cand(self, rid, conf):
        return MatchCandidate(reference_id=rid, confidence=conf, provenance=Provenance.global_())

    def test_authentic_report_is_bare(self):
        rep = VerificationReport(query_id="q", authentic=True)
        assert rep.forgery_type is None and rep.forgery_mask is None and rep.candidates == ()
        with pytest.raises(ValueError):
            VerificationReport(query_id="q", authentic=True, forgery_type=ForgeryType.CopyMove)
        with pytest.raises(ValueError):
            VerificationReport(query_id="q", authentic=True, candidates=(self.cand("r", 0.0),))

    def test_candidates_sorted_and_unique(self):
        VerificationReport(
            query_id="q", authentic=False, forgery_type=ForgeryType.Colorization,
            candidates=(self.cand("a", -0.1), self.cand("b", -0.2)),
        )
        with pytest.raises(ValueError):
            VerificationReport(
                query_id="q", authentic=False, forgery_type=ForgeryType.Colorization,
                candidates=(self.cand("a", -0.3), self.cand("b", -0.2)),
            )
        with pytest.raises(ValueError):
            VerificationReport(
                query_id="q", authentic=False, forgery_type=ForgeryType.Colorization,
                candidates=(self.cand("a", -0.1), self.cand("a", -0.2)),
            )


class TestGroundTruthTable:
    def test_pair_expansion(self):
        gt = GroundTruthTable(pairs={"q1": {"r1"}, "q2": {"r2", "r3"}})
        assert gt.positive_pairs == {("q1", "r1"), ("q2", "r2"), ("q2", "r3")}
        assert gt.originals_of("q2") == frozenset({"r2", "r3"})
        assert gt.originals_of("missing") == frozenset()

    def test_at_most_two_originals(self):
        with pytest.raises(ValueError):
            GroundTruthTable(pairs={"q": {"a", "b", "c"}})
