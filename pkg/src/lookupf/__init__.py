"""lookupf: image fact verification.

Two-phase pipeline: identify whether a query image was forged (and how),
then retrieve the original reference images it was derived from, fusing
whole-image retrieval with per-segment retrieval of the forged regions.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .core import (
    BinaryMask,
    ForgeryType,
    GroundTruthTable,
    ImageBuffer,
    MatchCandidate,
    Provenance,
    Segment,
    VerificationReport,
    parse_forgery_type,
)
from .descriptor import DEFAULT_GIST, Descriptor, GistParams, descriptor_distance, gist_descriptor
from .errors import LookupfError
from .evaluation import compute_metrics, micro_average_precision
from .index import ReferenceIndex, build_index, load_index, query_topk, save_index
from .pipeline import PipelineConfig, verify, verify_batch

__all__ = [
    "BinaryMask",
    "DEFAULT_GIST",
    "Descriptor",
    "ForgeryType",
    "GistParams",
    "GroundTruthTable",
    "ImageBuffer",
    "LookupfError",
    "MatchCandidate",
    "PipelineConfig",
    "Provenance",
    "ReferenceIndex",
    "Segment",
    "VerificationReport",
    "__version__",
    "build_index",
    "compute_metrics",
    "descriptor_distance",
    "gist_descriptor",
    "load_index",
    "micro_average_precision",
    "parse_forgery_type",
    "query_topk",
    "save_index",
    "verify",
    "verify_batch",
]
