from __future__ import annotations

import numpy as np
import pytest

from lookupf.core import BinaryMask, ImageBuffer, Segment
from lookupf.descriptor import Descriptor, gist_descriptor
from lookupf.errors import DimMismatch, DuplicateId, InvalidParams
from lookupf.index import (
    ReferenceIndex,
    build_index,
    load_index,
    query_topk,
    retrieve_original_segment,
    save_index,
)
from oracles import naive_topk


def unit(vec) -> Descriptor:
    v = np.asarray(vec, dtype=np.float64)
    return Descriptor(values=v / np.linalg.norm(v), normalized=True)


def random_index(rng, n=12, dim=8, manifest=""):
    ids = [f"r{i:02d}" for i in range(n)]
    vecs = [unit(rng.normal(size=dim)) for _ in range(n)]
    return build_index(zip(ids, vecs), manifest=manifest), ids, vecs


class TestBuild:
    def test_preserves_input_order(self, rng):
        idx, ids, _ = random_index(rng)
        assert list(idx.ids) == ids
        assert len(idx) == 12 and idx.dim == 8

    def test_duplicate_id_rejected(self, rng):
        v = unit(rng.normal(size=4))
        with pytest.raises(DuplicateId):
            build_index([("a", v), ("a", v)])

    def test_dim_mismatch_rejected(self, rng):
        with pytest.raises(DimMismatch):
            build_index([("a", unit(rng.normal(size=4))), ("b", unit(rng.normal(size=5)))])

    def test_empty_index(self):
        idx = build_index([])
        assert len(idx) == 0 and idx.dim == 0
        assert query_topk(idx, unit([1.0, 0.0]), 3) == []

    def test_vectors_stored_float32(self, rng):
        idx, _, _ = random_index(rng)
        assert idx.vectors.dtype == np.float32


class TestQuery:
    def test_matches_naive_sort_oracle(self, rng):
        for trial in range(25):
            n = int(rng.integers(1, 30))
            dim = int(rng.integers(2, 12))
            k = int(rng.integers(1, n + 4))
            ids = [f"v{i:03d}" for i in range(n)]
            vecs = [rng.normal(size=dim).astype(np.float32) for _ in range(n)]
            idx = build_index((i, Descriptor(values=v)) for i, v in zip(ids, vecs))
            q = Descriptor(values=rng.normal(size=dim).astype(np.float32))
            got = query_topk(idx, q, k)
            want = naive_topk(ids, [v.astype(np.float64) for v in vecs], q.values.astype(np.float64), k)
            assert [c.reference_id for c in got] == [i for _, i in want]
            for cand, (dist, _) in zip(got, want):
                assert -cand.confidence == pytest.approx(dist, abs=1e-9)

    def test_ties_break_by_id_ascending(self):
        v = Descriptor(values=np.array([1.0, 0.0], np.float32))
        idx = build_index([("zz", v), ("aa", v), ("mm", v)])
        got = query_topk(idx, v, 3)
        assert [c.reference_id for c in got] == ["aa", "mm", "zz"]
        assert all(c.confidence == 0.0 for c in got)

    def test_confidence_is_negative_distance(self):
        idx = build_index([("near", Descriptor(values=np.array([1.0, 0.0], np.float32))),
                           ("far", Descriptor(values=np.array([-1.0, 0.0], np.float32)))])
        got = query_topk(idx, Descriptor(values=np.array([1.0, 0.0], np.float32)), 2)
        assert got[0].reference_id == "near" and got[0].confidence == 0.0
        assert got[1].confidence == pytest.approx(-2.0)
        assert all(c.provenance.kind == "global" for c in got)

    def test_k_clamped_to_size(self, rng):
        idx, ids, vecs = random_index(rng, n=3)
        assert len(query_topk(idx, vecs[0], 10)) == 3

    def test_bad_k_and_dim(self, rng):
        idx, _, vecs = random_index(rng)
        with pytest.raises(InvalidParams):
            query_topk(idx, vecs[0], 0)
        with pytest.raises(DimMismatch):
            query_topk(idx, unit(np.ones(3)), 1)


class TestPersistence:
    def test_round_trip_preserves_everything(self, rng, tmp_path):
        idx, _, _ = random_index(rng, manifest='{"descriptor": "gist"}')
        p = tmp_path / "idx.lfds"
        save_index(idx, p)
        back = load_index(p)
        assert back.ids == idx.ids
        assert back.build_manifest == idx.build_manifest
        assert np.array_equal(back.vectors, idx.vectors)

    def test_save_load_save_byte_identical(self, rng, tmp_path):
        idx, _, _ = random_index(rng)
        a, b = tmp_path / "a.lfds", tmp_path / "b.lfds"
        save_index(idx, a)
        save_index(load_index(a), b)
        assert a.read_bytes() == b.read_bytes()


class TestSegmentRetrieval:
    def test_hits_re_tagged_local(self, corpus20):
        refs = corpus20[:6]
        idx = build_index((im.id, gist_descriptor(im)) for im in refs)
        src = refs[2]
        bits = np.ones((src.height, src.width), np.uint8)
        seg = Segment(
            box=(0, 0, src.width, src.height),
            mask_crop=BinaryMask(bits=bits),
            area=int(bits.sum()),
            parent_id="query0",
            index=1,
            image_crop=ImageBuffer(pixels=src.pixels, id="query0#seg1"),
        )
        got = retrieve_original_segment(idx, seg, gist_descriptor, k=3)
        assert len(got) == 3
        assert all(c.provenance.kind == "local" for c in got)
        assert all(c.provenance.segment_index == 1 for c in got)
        # the crop is pixel-identical to reference 2, so it must top the list
        assert got[0].reference_id == src.id
        assert got[0].confidence == 0.0
