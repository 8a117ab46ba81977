"""Two-phase verification pipeline.

Phase 1 (forgery identification) decides authentic vs. forged, the
forgery type, and, for copy-move/splicing only, a localization mask.
Phase 2 (fact retrieval) searches the reference index with the whole
image (global retrieval) and with each extracted forged segment (local
retrieval), then fuses both candidate lists. verify() runs the phases
end to end and emits a VerificationReport per query.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .core import (
    BinaryMask,
    ForgeryType,
    ImageBuffer,
    MatchCandidate,
    Segment,
    VerificationReport,
)
from .descriptor import DEFAULT_GIST, Descriptor, gist_descriptor
from .detect import (
    MASKABLE_TYPES,
    DetectorSuite,
    predict_forgery,
    predict_forgery_mask,
    predict_forgery_type,
)
from .errors import InvalidParams
from .index import ReferenceIndex, query_topk, retrieve_original_segment
from .maskops import DEFAULT_MAX_SEGMENTS, DEFAULT_MIN_AREA_FRACTION, extract_segments

__all__ = [
    "PipelineConfig",
    "forgery_identification",
    "global_retrieval",
    "local_retrieval",
    "fuse_candidates",
    "fact_retrieval",
    "verify",
    "verify_batch",
]

FUSION_RULES = ("max-confidence",)


def _default_extractor(img: ImageBuffer) -> Descriptor:
    return gist_descriptor(img, DEFAULT_GIST)


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one verification run needs, immutable and shareable.

    local_enabled=False degrades the pipeline to the global-only
    baseline used for ablation comparisons.
    """

    detector: DetectorSuite
    index: ReferenceIndex
    extractor: Callable[[ImageBuffer], Descriptor] = _default_extractor
    topk_global: int = 10
    topk_local: int = 10
    min_area_fraction: float = DEFAULT_MIN_AREA_FRACTION
    max_segments: int = DEFAULT_MAX_SEGMENTS
    fusion: str = "max-confidence"
    local_enabled: bool = True

    def __post_init__(self) -> None:
        if self.topk_global < 1 or self.topk_local < 1:
            raise InvalidParams(
                f"topk_global and topk_local must be >= 1, got {self.topk_global}, {self.topk_local}"
            )
        if self.fusion not in FUSION_RULES:
            raise InvalidParams(f"unknown fusion rule {self.fusion!r}; known: {FUSION_RULES}")


def forgery_identification(
    cfg: PipelineConfig, img: ImageBuffer
) -> tuple[bool, ForgeryType | None, BinaryMask | None]:
    """Phase 1. Authentic images short-circuit to (False, None, None);
    object-removal and colorization forgeries carry no mask."""
    flagged, _score = predict_forgery(cfg.detector, img)
    if not flagged:
        return False, None, None
    ftype = predict_forgery_type(cfg.detector, img)
    if ftype not in MASKABLE_TYPES:
        return True, ftype, None
    mask = predict_forgery_mask(cfg.detector, img, ftype)
    return True, ftype, mask


def global_retrieval(cfg: PipelineConfig, img: ImageBuffer) -> list[MatchCandidate]:
    """Whole-image search; candidates carry Global provenance."""
    if len(cfg.index) == 0:
        return []
    return query_topk(cfg.index, cfg.extractor(img), cfg.topk_global)


def local_retrieval(cfg: PipelineConfig, segments: Sequence[Segment]) -> list[MatchCandidate]:
    """Per-segment search; concatenated, each truncated to topk_local."""
    out: list[MatchCandidate] = []
    for seg in segments:
        out.extend(retrieve_original_segment(cfg.index, seg, cfg.extractor, cfg.topk_local))
    return out


def fuse_candidates(
    global_candidates: Sequence[MatchCandidate],
    local_candidates: Sequence[MatchCandidate],
) -> list[MatchCandidate]:
    """Union by reference id keeping the highest-confidence entry.

    Confidence ties between routes keep the global entry. Output is
    sorted by confidence descending, ties by id ascending.
    """
    best: dict[str, MatchCandidate] = {}
    for cand in list(global_candidates) + list(local_candidates):
        held = best.get(cand.reference_id)
        if held is None or cand.confidence > held.confidence:
            best[cand.reference_id] = cand
    return sorted(best.values(), key=lambda c: (-c.confidence, c.reference_id))


def fact_retrieval(
    cfg: PipelineConfig,
    img: ImageBuffer,
    ftype: ForgeryType | None,
    mask: BinaryMask | None,
) -> list[MatchCandidate]:
    """Phase 2. Global retrieval always; local retrieval only when the
    type supports segmentation and a mask is present."""
    global_candidates = global_retrieval(cfg, img)
    local_candidates: list[MatchCandidate] = []
    if cfg.local_enabled and ftype in MASKABLE_TYPES and mask is not None:
        segments = extract_segments(img, mask, cfg.min_area_fraction, cfg.max_segments)
        local_candidates = local_retrieval(cfg, segments)
    return fuse_candidates(global_candidates, local_candidates)


def verify(cfg: PipelineConfig, img: ImageBuffer) -> VerificationReport:
    """Full two-phase verification of one query image."""
    flagged, ftype, mask = forgery_identification(cfg, img)
    if not flagged:
        return VerificationReport(query_id=img.id, authentic=True)
    candidates = fact_retrieval(cfg, img, ftype, mask)
    return VerificationReport(
        query_id=img.id,
        authentic=False,
        forgery_type=ftype,
        forgery_mask=mask,
        candidates=tuple(candidates),
    )


def verify_batch(
    cfg: PipelineConfig,
    images: Iterable[ImageBuffer],
    threads: int = 1,
) -> tuple[list[VerificationReport], dict[str, str]]:
    """Verify many queries, isolating per-query failures.

    Returns reports sorted by query id plus an {id: error} map for the
    queries that raised. Output is identical for any thread count; a
    suite that declares itself single-threaded forces serial execution.
    """
    items = list(images)
    if not cfg.detector.thread_safe:
        threads = 1
    errors: dict[str, str] = {}
    reports: list[VerificationReport] = []

    def run_one(img: ImageBuffer) -> VerificationReport:
        return verify(cfg, img)

    if threads <= 1:
        for img in items:
            try:
                reports.append(run_one(img))
            except Exception as exc:  # noqa: BLE001 - per-query isolation
                errors[img.id] = f"{type(exc).__name__}: {exc}"
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [(img.id, pool.submit(run_one, img)) for img in items]
            for qid, fut in futures:
                try:
                    reports.append(fut.result())
                except Exception as exc:  # noqa: BLE001
                    errors[qid] = f"{type(exc).__name__}: {exc}"

    reports.sort(key=lambda r: r.query_id)
    return reports, errors
