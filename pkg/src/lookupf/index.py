"""Reference-descriptor index: exact nearest-neighbor search + persistence.

Search is brute force on purpose. At desk scale (hundreds to low
thousands of references) exactness and byte-reproducibility matter more
than speed; approximate search stays out of scope, behind the same
query functions, should the corpus ever grow.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .core import ImageBuffer, MatchCandidate, Provenance, Segment
from .descriptor import Descriptor
from .errors import DimMismatch, DuplicateId, InvalidParams
from .store import read_store, write_store

__all__ = [
    "ReferenceIndex",
    "build_index",
    "query_topk",
    "retrieve_original_segment",
    "save_index",
    "load_index",
]


@dataclass(frozen=True)
class ReferenceIndex:
    """Immutable (id, vector) table; vectors float32, distances float64."""

    dim: int
    ids: tuple[str, ...]
    vectors: np.ndarray
    build_manifest: str = ""

    def __post_init__(self) -> None:
        vecs = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if vecs.ndim != 2 or vecs.shape != (len(self.ids), self.dim):
            raise InvalidParams(
                f"vectors shape {vecs.shape} does not match {len(self.ids)} ids x dim {self.dim}"
            )
        if len(set(self.ids)) != len(self.ids):
            raise DuplicateId("reference ids must be unique")
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "ids", tuple(self.ids))

    def __len__(self) -> int:
        return len(self.ids)


def build_index(items: Iterable[tuple[str, Descriptor]], manifest: str = "") -> ReferenceIndex:
    """Materialize an index from an (id, Descriptor) stream, keeping input order."""
    ids: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    dim: int | None = None
    for rid, desc in items:
        if rid in seen:
            raise DuplicateId(f"duplicate reference id: {rid}")
        seen.add(rid)
        if dim is None:
            dim = desc.dim
        elif desc.dim != dim:
            raise DimMismatch(f"descriptor dim {desc.dim} != index dim {dim}")
        ids.append(rid)
        rows.append(desc.values)
    if dim is None:
        return ReferenceIndex(dim=0, ids=(), vectors=np.empty((0, 0), dtype=np.float32), build_manifest=manifest)
    return ReferenceIndex(dim=dim, ids=tuple(ids), vectors=np.stack(rows), build_manifest=manifest)


def query_topk(idx: ReferenceIndex, q: Descriptor, k: int) -> list[MatchCandidate]:
    """The k nearest entries by Euclidean distance.

    Confidence is the negated distance, so candidate lists sort by
    confidence descending; exact ties break by id ascending. Fewer than
    k results come back only when the index is smaller than k.
    """
    if k < 1:
        raise InvalidParams(f"k must be >= 1, got {k}")
    if len(idx) == 0:
        return []
    if q.dim != idx.dim:
        raise DimMismatch(f"query dim {q.dim} != index dim {idx.dim}")
    diff = idx.vectors.astype(np.float64) - q.values.astype(np.float64)[None, :]
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    order = sorted(range(len(idx)), key=lambda i: (dist[i], idx.ids[i]))[:k]
    return [
        MatchCandidate(reference_id=idx.ids[i], confidence=-float(dist[i]), provenance=Provenance.global_())
        for i in order
    ]


def retrieve_original_segment(
    idx: ReferenceIndex,
    seg: Segment,
    extractor: Callable[[ImageBuffer], Descriptor],
    k: int,
) -> list[MatchCandidate]:
    """Search the index with the descriptor of one segment's image crop.

    Candidates carry Local provenance tagged with the segment's index in
    its parent mask, so fused result lists stay traceable.
    """
    if len(idx) == 0:
        return []
    desc = extractor(seg.image_crop)
    hits = query_topk(idx, desc, k)
    local = Provenance.local(seg.index)
    return [MatchCandidate(h.reference_id, h.confidence, local) for h in hits]


def save_index(idx: ReferenceIndex, path: str | Path) -> None:
    """Persist to the descriptor-store format; load_index inverts exactly."""
    write_store(path, list(idx.ids), idx.vectors.reshape(len(idx), idx.dim), idx.build_manifest)


def load_index(path: str | Path) -> ReferenceIndex:
    """Read an index written by save_index (checksummed, byte-exact)."""
    ids, vectors, manifest = read_store(path)
    return ReferenceIndex(dim=vectors.shape[1], ids=tuple(ids), vectors=vectors, build_manifest=manifest)
