"""Image-to-vector embeddings.

The native descriptor is a 512-d luminance GIST: local contrast
normalization followed by a frequency-domain Gabor bank whose rectified
responses are block-averaged on a coarse grid. External embeddings
(e.g. CNN vectors computed elsewhere) are ingested from the binary
descriptor store. Whitening is an optional PCA transform fit on a
training split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .core import ImageBuffer, _lock
from .errors import DimensionMismatch, InvalidParams, TooFewSamples
from .resample import resize_bilinear
from .store import read_store, write_store

__all__ = [
    "Descriptor",
    "GistParams",
    "WhiteningModel",
    "DEFAULT_GIST",
    "gist_descriptor",
    "prepare_image",
    "gabor_bank",
    "descriptor_distance",
    "descriptor_drift",
    "fit_whitening",
    "load_external_descriptors",
    "save_descriptors",
]

# Residuals below this after background subtraction are treated as exact
# zeros, so quantization-flat images yield the all-zero descriptor.
RESIDUAL_SNAP = 1e-9

# Contrast-normalization lowpass cutoff, cycles per image.
PREFILTER_FC = 4.0


@dataclass(frozen=True)
class Descriptor:
    """Fixed-length embedding; float32 storage, read-only."""

    values: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=np.float32)
        if vals.ndim != 1:
            raise InvalidParams(f"descriptor must be 1-d, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise InvalidParams("descriptor contains non-finite entries")
        if self.normalized:
            nrm = float(np.linalg.norm(vals.astype(np.float64)))
            if abs(nrm - 1.0) > 1e-6:
                raise InvalidParams(f"normalized flag set but L2 norm is {nrm}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class GistParams:
    """Bank geometry for the native descriptor.

    Descriptor dimension is grid^2 * sum(orientations_per_scale).
    """

    resize_edge: int = 64
    scales: int = 4
    orientations_per_scale: tuple[int, ...] = (8, 8, 8, 8)
    grid: int = 4
    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        object.__setattr__(self, "orientations_per_scale", tuple(int(o) for o in self.orientations_per_scale))
        if self.scales < 1 or len(self.orientations_per_scale) != self.scales:
            raise InvalidParams(
                f"scales={self.scales} but {len(self.orientations_per_scale)} orientation counts"
            )
        if any(o < 1 for o in self.orientations_per_scale):
            raise InvalidParams("every scale needs at least one orientation")
        if self.grid < 1:
            raise InvalidParams(f"grid must be >= 1, got {self.grid}")
        if self.resize_edge < self.grid or self.resize_edge % self.grid != 0:
            raise InvalidParams(
                f"resize_edge {self.resize_edge} must be a positive multiple of grid {self.grid}"
            )
        if not (self.epsilon > 0.0 and math.isfinite(self.epsilon)):
            raise InvalidParams(f"epsilon must be a positive real, got {self.epsilon}")

    @property
    def dim(self) -> int:
        return self.grid * self.grid * sum(self.orientations_per_scale)


DEFAULT_GIST = GistParams()


@lru_cache(maxsize=8)
def _lowpass_transfer(n: int, fc: float) -> np.ndarray:
    """Gaussian lowpass in FFT bin order; unit gain at DC."""
    freqs = np.fft.fftfreq(n) * n  # integer cycles per image
    fx = freqs[None, :]
    fy = freqs[:, None]
    s1 = fc / math.sqrt(math.log(2.0))
    gf = np.exp(-(fx * fx + fy * fy) / (s1 * s1))
    gf.setflags(write=False)
    return gf


@lru_cache(maxsize=8)
def _bank(n: int, orientations_per_scale: tuple[int, ...]) -> np.ndarray:
    """Transfer functions, shape (num_filters, n, n), FFT bin order.

    Filter (s, o) is a one-sided log-free Gabor: radial Gaussian around
    center frequency 0.3 / 1.85^s cycles per pixel, angular Gaussian
    around pi * o / orientations. One-sided lobes give complex spatial
    responses whose magnitude is the local oriented energy envelope.
    DC gain is forced to zero so constant images produce no response.
    """
    freqs = np.fft.fftfreq(n) * n
    fx = freqs[None, :]
    fy = freqs[:, None]
    fr = np.sqrt(fx * fx + fy * fy) / n  # cycles per pixel, Nyquist 0.5
    theta = np.arctan2(fy, fx)

    filters = []
    for s, n_orient in enumerate(orientations_per_scale):
        f_center = 0.3 / (1.85 ** s)
        radial = np.exp(-10.0 * 0.35 * (fr / f_center - 1.0) ** 2)
        ang_coeff = 2.0 * (16.0 * n_orient * n_orient / 1024.0) * math.pi
        for o in range(n_orient):
            tr = theta - math.pi * o / n_orient
            tr = tr + 2.0 * math.pi * (tr < -math.pi) - 2.0 * math.pi * (tr > math.pi)
            g = radial * np.exp(-ang_coeff * tr * tr)
            g[0, 0] = 0.0
            filters.append(g)
    bank = np.stack(filters)
    bank.setflags(write=False)
    return bank


def gabor_bank(params: GistParams = DEFAULT_GIST) -> np.ndarray:
    """The bank's frequency-domain transfer functions (read-only view)."""
    return _bank(params.resize_edge, params.orientations_per_scale)


def prepare_image(img: ImageBuffer, params: GistParams = DEFAULT_GIST) -> np.ndarray:
    """Luminance, square resample, and local contrast normalization.

    Returns a float64 array of shape (resize_edge, resize_edge) whose
    local mean is removed and whose local std is divided out (with the
    epsilon guard). Residuals below RESIDUAL_SNAP are zeroed so flat
    inputs come out exactly zero.
    """
    n = params.resize_edge
    x = resize_bilinear(img.luminance(), n, n)
    x = np.log1p(x)

    gf = _lowpass_transfer(n, PREFILTER_FC)
    lowpass = np.fft.ifft2(np.fft.fft2(x) * gf).real
    res = x - lowpass
    res[np.abs(res) < RESIDUAL_SNAP] = 0.0

    local_energy = np.abs(np.fft.ifft2(np.fft.fft2(res * res) * gf))
    return res / (params.epsilon + np.sqrt(local_energy))


def gist_descriptor(img: ImageBuffer, params: GistParams = DEFAULT_GIST) -> Descriptor:
    """Native global descriptor.

    Pipeline: prepare_image, multiply each bank transfer function in the
    frequency domain, take response magnitudes, average over a grid x
    grid block partition, concatenate blocks in (scale, orientation,
    block-row, block-col) order, then L2-normalize. The all-zero vector
    (flat input) is returned as-is with normalized=False.
    """
    n = params.resize_edge
    grid = params.grid
    block = n // grid
    pre = prepare_image(img, params)
    spectrum = np.fft.fft2(pre)

    bank = _bank(n, params.orientations_per_scale)
    features = np.empty((bank.shape[0], grid * grid), dtype=np.float64)
    for i in range(bank.shape[0]):
        mag = np.abs(np.fft.ifft2(spectrum * bank[i]))
        pooled = mag.reshape(grid, block, grid, block).mean(axis=(1, 3))
        features[i] = pooled.ravel()
    vec = features.ravel()

    nrm = float(np.linalg.norm(vec))
    if nrm == 0.0:
        return Descriptor(np.zeros(vec.shape, dtype=np.float32), normalized=False)
    return Descriptor((vec / nrm).astype(np.float32), normalized=True)


def descriptor_distance(a: Descriptor, b: Descriptor) -> float:
    """Euclidean distance, accumulated in float64."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"descriptor dims differ: {a.dim} vs {b.dim}")
    diff = a.values.astype(np.float64) - b.values.astype(np.float64)
    return float(np.sqrt(np.dot(diff, diff)))


def _renormalized(d: Descriptor) -> Descriptor:
    vals = d.values.astype(np.float64)
    nrm = float(np.linalg.norm(vals))
    if nrm == 0.0:
        return d
    return Descriptor((vals / nrm).astype(np.float32), normalized=True)


def descriptor_drift(original: Descriptor, transformed: Descriptor) -> float:
    """Distance between re-normalized descriptors; gauges how far an
    augmentation moved an image in embedding space."""
    if original.dim != transformed.dim:
        raise DimensionMismatch(f"descriptor dims differ: {original.dim} vs {transformed.dim}")
    return descriptor_distance(_renormalized(original), _renormalized(transformed))


@dataclass(frozen=True)
class WhiteningModel:
    """PCA whitening: out = transform @ (x - mean)."""

    mean: np.ndarray
    transform: np.ndarray

    def __post_init__(self) -> None:
        mean = _lock(np.asarray(self.mean, dtype=np.float64))
        transform = _lock(np.asarray(self.transform, dtype=np.float64))
        if mean.ndim != 1 or transform.ndim != 2 or transform.shape[1] != mean.shape[0]:
            raise InvalidParams(
                f"incompatible shapes: mean {mean.shape}, transform {transform.shape}"
            )
        if transform.shape[0] > transform.shape[1]:
            raise InvalidParams("output dimension exceeds input dimension")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(transform))):
            raise InvalidParams("whitening model contains non-finite entries")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "transform", transform)

    @property
    def out_dim(self) -> int:
        return self.transform.shape[0]

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Whiten one vector or a (n, d) batch; returns float64."""
        x = np.asarray(values, dtype=np.float64)
        return (x - self.mean) @ self.transform.T


def fit_whitening(train: list[Descriptor], out_dim: int, eps: float = 1e-6) -> WhiteningModel:
    """Fit PCA whitening on training descriptors.

    Requires strictly more samples than output dimensions. Eigenvectors
    of the sample covariance are scaled by 1/sqrt(eigenvalue + eps).
    """
    if out_dim < 1:
        raise InvalidParams(f"out_dim must be >= 1, got {out_dim}")
    if len(train) <= out_dim:
        raise TooFewSamples(f"need more than {out_dim} samples, got {len(train)}")
    dims = {d.dim for d in train}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed descriptor dimensions: {sorted(dims)}")
    (d,) = dims
    if out_dim > d:
        raise InvalidParams(f"out_dim {out_dim} exceeds descriptor dimension {d}")

    x = np.stack([t.values for t in train]).astype(np.float64)
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (x.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)  # ascending
    top = slice(d - 1, d - 1 - out_dim, -1)
    scale = 1.0 / np.sqrt(eigvals[top] + eps)
    transform = eigvecs[:, top].T * scale[:, None]
    return WhiteningModel(mean=mean, transform=transform)


def load_external_descriptors(path: str | Path, normalize: bool = True) -> list[tuple[str, Descriptor]]:
    """Read (id, Descriptor) pairs from a descriptor-store file.

    With normalize=True (the default for search use) every non-zero
    vector is L2-normalized; normalize=False preserves the stored bytes
    so save_descriptors round-trips exactly.
    """
    ids, vectors, _manifest = read_store(path)
    out: list[tuple[str, Descriptor]] = []
    for rid, row in zip(ids, vectors):
        if normalize:
            nrm = float(np.linalg.norm(row.astype(np.float64)))
            if nrm == 0.0:
                out.append((rid, Descriptor(row, normalized=False)))
            else:
                out.append((rid, Descriptor((row.astype(np.float64) / nrm).astype(np.float32), normalized=True)))
        else:
            out.append((rid, Descriptor(row, normalized=False)))
    return out


def save_descriptors(path: str | Path, items: list[tuple[str, Descriptor]], manifest: str = "") -> None:
    """Write (id, Descriptor) pairs to a descriptor-store file."""
    if items:
        dims = {d.dim for _, d in items}
        if len(dims) != 1:
            raise DimensionMismatch(f"mixed descriptor dimensions: {sorted(dims)}")
        vectors = np.stack([d.values for _, d in items])
    else:
        vectors = np.empty((0, 0), dtype=np.float32)
    write_store(path, [rid for rid, _ in items], vectors, manifest)
