"""Binary descriptor-store codec shared by the index and embedding loaders.

Layout (little-endian):

    magic "LFDS" (4 bytes)
    version      u8  = 1
    dim          u32
    count        u64
    manifest_len u16, then manifest_len bytes of UTF-8
    count records of { id_len u16, id UTF-8, dim * f32 }
    crc32        u32 over every preceding byte

The trailing checksum makes truncation and bit rot detectable without a
separate sidecar.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import BadMagic, ChecksumMismatch, TruncatedFile

__all__ = ["MAGIC", "VERSION", "read_store", "write_store"]

MAGIC = b"LFDS"
VERSION = 1

_HEADER = struct.Struct("<4sBIQ")
_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")


def write_store(path: str | Path, ids: list[str], vectors: np.ndarray, manifest: str = "") -> None:
    """Write (ids, vectors) to ``path``; vectors shape (count, dim) float32."""
    vecs = np.ascontiguousarray(vectors, dtype="<f4")
    if vecs.ndim != 2:
        raise ValueError(f"vectors must be a 2-d array, got shape {vecs.shape}")
    if len(ids) != vecs.shape[0]:
        raise ValueError(f"{len(ids)} ids for {vecs.shape[0]} vectors")
    manifest_bytes = manifest.encode("utf-8")
    if len(manifest_bytes) > 0xFFFF:
        raise ValueError("manifest longer than 65535 bytes")

    parts = [_HEADER.pack(MAGIC, VERSION, vecs.shape[1], vecs.shape[0])]
    parts.append(_U16.pack(len(manifest_bytes)))
    parts.append(manifest_bytes)
    for rid, row in zip(ids, vecs):
        id_bytes = rid.encode("utf-8")
        if len(id_bytes) > 0xFFFF:
            raise ValueError(f"id longer than 65535 bytes: {rid[:32]}...")
        parts.append(_U16.pack(len(id_bytes)))
        parts.append(id_bytes)
        parts.append(row.tobytes())
    body = b"".join(parts)
    blob = body + _U32.pack(zlib.crc32(body))
    Path(path).write_bytes(blob)


def read_store(path: str | Path) -> tuple[list[str], np.ndarray, str]:
    """Read a store file; returns (ids, vectors float32 (count, dim), manifest)."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size + _U16.size + _U32.size:
        raise TruncatedFile(f"{path}: {len(blob)} bytes is too short for a header")
    magic, version, dim, count = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise BadMagic(f"{path}: expected magic {MAGIC!r}, got {magic!r}")
    if version != VERSION:
        raise BadMagic(f"{path}: unsupported version {version}")

    # parse structure first so truncation is reported as truncation; the
    # checksum is only meaningful once the byte counts add up
    body, crc_bytes = blob[:-_U32.size], blob[-_U32.size:]
    offset = _HEADER.size
    (manifest_len,) = _U16.unpack_from(body, offset)
    offset += _U16.size
    if offset + manifest_len > len(body):
        raise TruncatedFile(f"{path}: manifest overruns file")
    manifest = body[offset : offset + manifest_len].decode("utf-8")
    offset += manifest_len

    ids: list[str] = []
    vectors = np.empty((count, dim), dtype="<f4")
    row_bytes = dim * 4
    for i in range(count):
        if offset + _U16.size > len(body):
            raise TruncatedFile(f"{path}: record {i} id length missing")
        (id_len,) = _U16.unpack_from(body, offset)
        offset += _U16.size
        if offset + id_len + row_bytes > len(body):
            raise TruncatedFile(f"{path}: record {i} cut short")
        ids.append(body[offset : offset + id_len].decode("utf-8"))
        offset += id_len
        vectors[i] = np.frombuffer(body, dtype="<f4", count=dim, offset=offset)
        offset += row_bytes
    if offset != len(body):
        raise TruncatedFile(f"{path}: {len(body) - offset} unexpected trailing bytes")
    (stored_crc,) = _U32.unpack(crc_bytes)
    if zlib.crc32(body) != stored_crc:
        raise ChecksumMismatch(f"{path}: crc32 mismatch")
    return ids, vectors, manifest
