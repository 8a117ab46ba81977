"""Dataset construction: forgery synthesis, augmentations, layout emission.

Copy-move and splicing forgeries are composited with alpha blending
(feathered mask edges below alpha 1; exact paste at alpha 1) and emit
destination-footprint masks. Augmentations are seeded and deterministic,
grouped into difficulty levels calibrated by descriptor drift. The
emitter lays out the seven-folder dataset (Reference, Training, Query,
AugmentedQuery, Originals, Segments, Annotations) with ground-truth and
proportion tables, reproducible bit-for-bit from one master seed at any
parallelism level.
"""

from __future__ import annotations

import hashlib
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .core import BinaryMask, ForgeryType, GroundTruthTable, ImageBuffer, validate_pair
from .descriptor import DEFAULT_GIST, descriptor_drift, gist_descriptor
from .errors import (
    EmptyCorpus,
    EmptyObjectMask,
    InvalidParams,
    PlacementOutOfBounds,
)
from .evaluation import write_gt_csv, write_proportions_csv
from .imgio import save_image, save_mask
from .maskops import extract_segments, forgery_proportion, save_segment
from .resample import resize_bilinear, resize_nearest

__all__ = [
    "ForgeryRecipe",
    "AugOp",
    "AugmentationPlan",
    "DatasetConfig",
    "LEVELS",
    "AUG_FAMILIES",
    "generate_copy_move",
    "generate_splicing",
    "augment_image",
    "calibrate_difficulty",
    "dedup_references",
    "emit_dataset_layout",
    "builtin_plans",
    "mild_plans",
    "ellipse_mask",
    "synth_scene",
    "synth_object_card",
    "random_copy_move_recipe",
    "random_splicing_recipe",
    "item_rng",
]

LEVELS = ("Easy", "Medium", "Hard", "Nightmare")
AUG_FAMILIES = ("color", "pixel", "geometric", "corruption", "weather", "ui-embed")

# Mask-edge feather width (Gaussian sigma, pixels) for alpha < 1 blends.
FEATHER_SIGMA = 2.0


# --- recipes and plans -------------------------------------------------------


@dataclass(frozen=True)
class ForgeryRecipe:
    """One compositing job: which object goes where, how big, how opaque."""

    kind: ForgeryType
    source_id: str
    object_mask: BinaryMask
    placement: tuple[int, int]  # (dx, dy) destination top-left, pixels
    scale: float = 1.0
    alpha: float = 1.0
    donor_id: str | None = None  # splicing only

    def __post_init__(self) -> None:
        if self.kind not in (ForgeryType.CopyMove, ForgeryType.ImageSplicing):
            raise InvalidParams(f"recipe kind must be copy-move or image-splicing, got {self.kind}")
        if not (self.scale > 0.0):
            raise InvalidParams(f"scale must be > 0, got {self.scale}")
        if not (0.0 < self.alpha <= 1.0):
            raise InvalidParams(f"alpha must be in (0, 1], got {self.alpha}")
        if self.kind is ForgeryType.ImageSplicing and self.donor_id is None:
            raise InvalidParams("splicing recipe needs a donor_id")


@dataclass(frozen=True)
class AugOp:
    """One augmentation step: (family, name, numeric parameters)."""

    family: str
    name: str
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self) -> None:
        if self.family not in AUG_FAMILIES:
            raise InvalidParams(f"unknown augmentation family {self.family!r}")
        object.__setattr__(self, "params", tuple((str(k), float(v)) for k, v in self.params))

    def kwargs(self) -> dict[str, float]:
        return dict(self.params)


@dataclass(frozen=True)
class AugmentationPlan:
    """Ordered augmentation ops plus the seed that fixes their randomness."""

    name: str
    level: str
    ops: tuple[AugOp, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        if self.level not in LEVELS:
            raise InvalidParams(f"level must be one of {LEVELS}, got {self.level!r}")
        object.__setattr__(self, "ops", tuple(self.ops))

    def with_seed(self, seed: int) -> "AugmentationPlan":
        return AugmentationPlan(self.name, self.level, self.ops, seed)


# --- compositing -------------------------------------------------------------


def _tight_bbox(bits: np.ndarray) -> tuple[int, int, int, int]:
    ys = np.flatnonzero(bits.any(axis=1))
    xs = np.flatnonzero(bits.any(axis=0))
    y0, y1 = int(ys[0]), int(ys[-1]) + 1
    x0, x1 = int(xs[0]), int(xs[-1]) + 1
    return x0, y0, x1 - x0, y1 - y0


def _scaled_object(
    donor: ImageBuffer, object_mask: BinaryMask, scale: float
) -> tuple[np.ndarray, np.ndarray]:
    """Crop the object to its tight bbox and rescale.

    Pixels resample bilinearly (float64), the mask nearest-neighbor so
    it stays strictly binary. Returns (pixels, bits) at the scaled size.
    """
    if object_mask.area == 0:
        raise EmptyObjectMask("object mask has no set bits")
    validate_pair(donor, object_mask)
    x, y, w, h = _tight_bbox(object_mask.bits)
    crop_bits = object_mask.bits[y : y + h, x : x + w]
    crop_px = donor.pixels[y : y + h, x : x + w].astype(np.float64)

    out_h = max(1, int(round(h * scale)))
    out_w = max(1, int(round(w * scale)))
    if (out_h, out_w) != (h, w):
        crop_px = resize_bilinear(crop_px, out_h, out_w)
        crop_bits = resize_nearest(crop_bits, out_h, out_w)
    if not crop_bits.any():
        raise EmptyObjectMask(f"object mask vanished at scale {scale}")
    return crop_px, crop_bits.astype(np.uint8)


def _composite(base: ImageBuffer, recipe: ForgeryRecipe, donor: ImageBuffer) -> tuple[ImageBuffer, BinaryMask]:
    obj_px, obj_bits = _scaled_object(donor, recipe.object_mask, recipe.scale)
    oh, ow = obj_bits.shape
    dx, dy = recipe.placement
    if dx < 0 or dy < 0 or dx + ow > base.width or dy + oh > base.height:
        raise PlacementOutOfBounds(
            f"object {ow}x{oh} at ({dx}, {dy}) exceeds target {base.width}x{base.height}"
        )

    out = base.pixels.copy()
    region = out[dy : dy + oh, dx : dx + ow].astype(np.float64)
    if base.channels == 3 and obj_px.ndim == 2:
        obj_px = np.repeat(obj_px[:, :, None], 3, axis=2)
    if base.channels == 1 and obj_px.ndim == 3:
        obj_px = obj_px.mean(axis=2)

    bits3 = obj_bits[:, :, None] if base.channels == 3 else obj_bits
    if recipe.alpha >= 1.0:
        # exact paste: no arithmetic on the destination pixels
        pasted = np.clip(np.rint(obj_px), 0, 255).astype(np.uint8)
        blended = np.where(bits3.astype(bool), pasted, out[dy : dy + oh, dx : dx + ow])
    else:
        # feather only interior to the footprint so locality holds
        alpha_map = ndimage.gaussian_filter(obj_bits.astype(np.float64), FEATHER_SIGMA)
        alpha_map = np.clip(alpha_map, 0.0, 1.0) * recipe.alpha * obj_bits
        a3 = alpha_map[:, :, None] if base.channels == 3 else alpha_map
        mixed = np.clip(np.rint(a3 * obj_px + (1.0 - a3) * region), 0, 255).astype(np.uint8)
        blended = np.where(bits3.astype(bool), mixed, out[dy : dy + oh, dx : dx + ow])
    out[dy : dy + oh, dx : dx + ow] = blended

    full_bits = np.zeros((base.height, base.width), dtype=np.uint8)
    full_bits[dy : dy + oh, dx : dx + ow] = obj_bits
    return ImageBuffer(out, id=f"{base.id}+forged"), BinaryMask(full_bits)


def generate_copy_move(img: ImageBuffer, recipe: ForgeryRecipe) -> tuple[ImageBuffer, BinaryMask]:
    """Duplicate a region of ``img`` onto itself per the recipe.

    The returned mask covers only the destination footprint; every pixel
    outside it is byte-identical to the input.
    """
    if recipe.kind is not ForgeryType.CopyMove:
        raise InvalidParams(f"recipe kind is {recipe.kind.canonical}, expected copy-move")
    return _composite(img, recipe, donor=img)


def generate_splicing(
    target: ImageBuffer, donor: ImageBuffer, recipe: ForgeryRecipe
) -> tuple[ImageBuffer, BinaryMask]:
    """Paste an object cut from ``donor`` into ``target``.

    Ground truth downstream records both the target and donor ids as
    originals of the forged query.
    """
    if recipe.kind is not ForgeryType.ImageSplicing:
        raise InvalidParams(f"recipe kind is {recipe.kind.canonical}, expected image-splicing")
    return _composite(target, recipe, donor=donor)


# --- augmentation ops --------------------------------------------------------


def _to_float(arr: np.ndarray) -> np.ndarray:
    return arr.astype(np.float64)


def _to_uint8(arr: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(arr), 0, 255).astype(np.uint8)


def _lum(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 2:
        return arr.astype(np.float64)
    px = arr.astype(np.float64)
    return 0.299 * px[:, :, 0] + 0.587 * px[:, :, 1] + 0.114 * px[:, :, 2]


def _op_brightness(arr, rng, factor=1.2):
    return _to_uint8(_to_float(arr) * factor)


def _op_contrast(arr, rng, factor=1.3):
    return _to_uint8(128.0 + factor * (_to_float(arr) - 128.0))


def _op_saturation(arr, rng, factor=1.5):
    if arr.ndim == 2:
        return arr.copy()
    gray = _lum(arr)[:, :, None]
    return _to_uint8(gray + factor * (_to_float(arr) - gray))


def _op_grayscale(arr, rng):
    if arr.ndim == 2:
        return arr.copy()
    return _to_uint8(np.repeat(_lum(arr)[:, :, None], 3, axis=2))


def _op_blur(arr, rng, sigma=1.0):
    sigmas = (sigma, sigma, 0) if arr.ndim == 3 else (sigma, sigma)
    return _to_uint8(ndimage.gaussian_filter(_to_float(arr), sigmas))


def _op_sharpen(arr, rng, amount=1.0):
    x = _to_float(arr)
    sigmas = (1.0, 1.0, 0) if arr.ndim == 3 else (1.0, 1.0)
    return _to_uint8(x + amount * (x - ndimage.gaussian_filter(x, sigmas)))


def _op_jpeg(arr, rng, quality=75):
    mode = "RGB" if arr.ndim == 3 else "L"
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="JPEG", quality=int(quality))
    buf.seek(0)
    return np.asarray(Image.open(buf).convert(mode))


def _op_pixelate(arr, rng, block=4):
    h, w = arr.shape[0], arr.shape[1]
    small_h = max(1, int(round(h / block)))
    small_w = max(1, int(round(w / block)))
    return resize_nearest(resize_nearest(arr, small_h, small_w), h, w)


def _op_crop(arr, rng, fraction=0.8):
    h, w = arr.shape[0], arr.shape[1]
    nh = max(1, int(round(h * fraction)))
    nw = max(1, int(round(w * fraction)))
    y0 = (h - nh) // 2
    x0 = (w - nw) // 2
    return arr[y0 : y0 + nh, x0 : x0 + nw].copy()


def _op_pad(arr, rng, fraction=0.1):
    border = max(1, int(round(min(arr.shape[0], arr.shape[1]) * fraction)))
    widths = [(border, border), (border, border)] + ([(0, 0)] if arr.ndim == 3 else [])
    return np.pad(arr, widths, mode="constant")


def _op_flip(arr, rng):
    return np.flip(arr, axis=1).copy()


def _op_rotate(arr, rng, degrees=15.0):
    rotated = ndimage.rotate(
        _to_float(arr), degrees, axes=(1, 0), reshape=True, order=1, mode="constant", prefilter=False
    )
    return _to_uint8(rotated)


def _op_aspect(arr, rng, factor=1.25):
    h, w = arr.shape[0], arr.shape[1]
    return _to_uint8(resize_bilinear(_to_float(arr), h, max(1, int(round(w * factor)))))


def _solve_homography(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    rows = []
    rhs = []
    for (x, y), (u, v) in zip(src, dst):
        rows.append([x, y, 1, 0, 0, 0, -u * x, -u * y])
        rows.append([0, 0, 0, x, y, 1, -v * x, -v * y])
        rhs.extend([u, v])
    h = np.linalg.solve(np.array(rows, dtype=np.float64), np.array(rhs, dtype=np.float64))
    return np.append(h, 1.0).reshape(3, 3)


def _op_perspective(arr, rng, strength=0.12):
    h, w = arr.shape[0], arr.shape[1]
    corners = np.array([[0, 0], [w - 1, 0], [w - 1, h - 1], [0, h - 1]], dtype=np.float64)
    jitter = rng.uniform(0.0, strength, size=(4, 2)) * np.array([w, h])
    inward = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=np.float64)
    moved = corners + jitter * inward
    hom = _solve_homography(corners, moved)
    inv = np.linalg.inv(hom)
    ys, xs = np.mgrid[0:h, 0:w]
    ones = np.ones_like(xs, dtype=np.float64)
    coords = np.stack([xs.astype(np.float64), ys.astype(np.float64), ones])
    mapped = np.tensordot(inv, coords, axes=(1, 0))
    sx = mapped[0] / mapped[2]
    sy = mapped[1] / mapped[2]
    def sample(chan: np.ndarray) -> np.ndarray:
        return ndimage.map_coordinates(chan, [sy, sx], order=1, mode="constant", cval=0.0)
    x = _to_float(arr)
    if arr.ndim == 3:
        out = np.stack([sample(x[:, :, c]) for c in range(x.shape[2])], axis=2)
    else:
        out = sample(x)
    return _to_uint8(out)


def _op_noise(arr, rng, sigma=8.0):
    return _to_uint8(_to_float(arr) + rng.normal(0.0, sigma, size=arr.shape))


def _op_dropout(arr, rng, fraction=0.05):
    keep = rng.random(arr.shape[:2]) >= fraction
    out = arr.copy()
    if arr.ndim == 3:
        out[~keep] = 0
    else:
        out[~keep] = 0
    return out


def _op_jigsaw(arr, rng, grid=3):
    grid = int(grid)
    h, w = arr.shape[0], arr.shape[1]
    th, tw = h // grid, w // grid
    if th == 0 or tw == 0:
        raise InvalidParams(f"jigsaw grid {grid} too fine for {w}x{h}")
    out = arr[: th * grid, : tw * grid].copy()
    tiles = [
        out[r * th : (r + 1) * th, c * tw : (c + 1) * tw].copy()
        for r in range(grid)
        for c in range(grid)
    ]
    perm = rng.permutation(len(tiles))
    for slot, src_idx in enumerate(perm):
        r, c = divmod(slot, grid)
        out[r * th : (r + 1) * th, c * tw : (c + 1) * tw] = tiles[src_idx]
    return out


def _op_fog(arr, rng, strength=0.4):
    h, w = arr.shape[0], arr.shape[1]
    fld = ndimage.gaussian_filter(rng.random((h, w)), sigma=max(2.0, min(h, w) / 8.0))
    lo, hi = float(fld.min()), float(fld.max())
    fld = (fld - lo) / (hi - lo) if hi > lo else np.zeros_like(fld)
    a = strength * fld
    if arr.ndim == 3:
        a = a[:, :, None]
    return _to_uint8(_to_float(arr) * (1.0 - a) + 255.0 * a)


def _op_frame(arr, rng, border_fraction=0.08):
    """Composite onto a synthetic app-window frame (header bar + margins)."""
    h, w = arr.shape[0], arr.shape[1]
    border = max(4, int(round(min(h, w) * border_fraction)))
    header = border * 3
    ch = h + header + 2 * border
    cw = w + 2 * border
    canvas = np.full((ch, cw, 3), 235, dtype=np.uint8)
    canvas[:header] = (44, 48, 56)
    r = max(2, border // 2)
    for i, color in enumerate([(224, 90, 85), (230, 190, 80), (120, 195, 100)]):
        cx = border + i * (2 * r + r)
        canvas[header // 2 - r : header // 2 + r, cx : cx + 2 * r] = color
    bar_x = border + 3 * (3 * r)
    canvas[header // 2 - r : header // 2 + r, bar_x : cw - border] = (70, 74, 82)
    content = arr if arr.ndim == 3 else np.repeat(arr[:, :, None], 3, axis=2)
    canvas[header + border : header + border + h, border : border + w] = content
    return canvas


_OPS = {
    "brightness": ("color", _op_brightness),
    "contrast": ("color", _op_contrast),
    "saturation": ("color", _op_saturation),
    "grayscale": ("color", _op_grayscale),
    "blur": ("pixel", _op_blur),
    "sharpen": ("pixel", _op_sharpen),
    "jpeg": ("pixel", _op_jpeg),
    "pixelate": ("pixel", _op_pixelate),
    "crop": ("geometric", _op_crop),
    "pad": ("geometric", _op_pad),
    "flip": ("geometric", _op_flip),
    "rotate": ("geometric", _op_rotate),
    "aspect": ("geometric", _op_aspect),
    "perspective": ("geometric", _op_perspective),
    "noise": ("corruption", _op_noise),
    "dropout": ("corruption", _op_dropout),
    "jigsaw": ("corruption", _op_jigsaw),
    "fog": ("weather", _op_fog),
    "frame": ("ui-embed", _op_frame),
}


def augment_image(img: ImageBuffer, plan: AugmentationPlan) -> ImageBuffer:
    """Apply the plan's ops in order; all randomness comes from plan.seed.

    The same (image, plan) always yields byte-identical output. An empty
    plan is the identity.
    """
    rng = np.random.default_rng(plan.seed)
    arr = img.pixels
    for op in plan.ops:
        entry = _OPS.get(op.name)
        if entry is None:
            raise InvalidParams(f"unknown augmentation op {op.name!r}")
        family, fn = entry
        if family != op.family:
            raise InvalidParams(f"op {op.name!r} belongs to family {family!r}, not {op.family!r}")
        arr = fn(arr, rng, **op.kwargs())
    return ImageBuffer(np.ascontiguousarray(arr), id=f"{img.id}+{plan.name}" if plan.ops else img.id)


def builtin_plans(seed: int = 0) -> list[AugmentationPlan]:
    """The stock single- and multi-op plans used for calibration demos."""
    mk = lambda fam, name, **kw: AugOp(fam, name, tuple(sorted(kw.items())))
    plans = [
        AugmentationPlan("identity", "Easy", (), seed),
        AugmentationPlan("flip", "Easy", (mk("geometric", "flip"),), seed),
        AugmentationPlan("brightness-up", "Easy", (mk("color", "brightness", factor=1.15),), seed),
        AugmentationPlan("contrast-down", "Easy", (mk("color", "contrast", factor=0.85),), seed),
        AugmentationPlan("jpeg-85", "Medium", (mk("pixel", "jpeg", quality=85),), seed),
        AugmentationPlan("blur-1", "Medium", (mk("pixel", "blur", sigma=1.0),), seed),
        AugmentationPlan("saturation-up", "Medium", (mk("color", "saturation", factor=1.6),), seed),
        AugmentationPlan("noise-8", "Medium", (mk("corruption", "noise", sigma=8.0),), seed),
        AugmentationPlan("pixelate-4", "Hard", (mk("pixel", "pixelate", block=4),), seed),
        AugmentationPlan("fog-04", "Hard", (mk("weather", "fog", strength=0.4),), seed),
        AugmentationPlan("grayscale", "Hard", (mk("color", "grayscale"),), seed),
        AugmentationPlan("rotate-20", "Hard", (mk("geometric", "rotate", degrees=20.0),), seed),
        AugmentationPlan(
            "crop-noise", "Nightmare",
            (mk("geometric", "crop", fraction=0.5), mk("corruption", "noise", sigma=14.0)), seed,
        ),
        AugmentationPlan("jigsaw-3", "Nightmare", (mk("corruption", "jigsaw", grid=3),), seed),
        AugmentationPlan(
            "frame-fog", "Nightmare",
            (mk("ui-embed", "frame"), mk("weather", "fog", strength=0.5)), seed,
        ),
        AugmentationPlan(
            "perspective-noise", "Nightmare",
            (mk("geometric", "perspective", strength=0.18), mk("corruption", "noise", sigma=10.0)), seed,
        ),
    ]
    return plans


def mild_plans(seed: int = 0) -> list[AugmentationPlan]:
    """Dimension-preserving plans safe for augmented queries.

    Geometric ops are excluded so a parent query's forgery mask stays
    pixel-aligned with its augmented variant.
    """
    mk = lambda fam, name, **kw: AugOp(fam, name, tuple(sorted(kw.items())))
    return [
        AugmentationPlan("brightness-up", "Easy", (mk("color", "brightness", factor=1.15),), seed),
        AugmentationPlan("contrast-down", "Easy", (mk("color", "contrast", factor=0.85),), seed),
        AugmentationPlan("jpeg-70", "Medium", (mk("pixel", "jpeg", quality=70),), seed),
        AugmentationPlan("blur-08", "Medium", (mk("pixel", "blur", sigma=0.8),), seed),
        AugmentationPlan("noise-6", "Medium", (mk("corruption", "noise", sigma=6.0),), seed),
        AugmentationPlan("fog-025", "Hard", (mk("weather", "fog", strength=0.25),), seed),
    ]


def calibrate_difficulty(
    corpus: list[ImageBuffer],
    candidate_plans: list[AugmentationPlan],
) -> dict[AugmentationPlan, str]:
    """Assign Easy/Medium/Hard/Nightmare by measured descriptor drift.

    Each plan's mean drift over the corpus ranks it among the candidates;
    quartiles of that ranking map to the four levels (a single plan lands
    at Easy). Returned mapping iterates in candidate order.
    """
    if not corpus:
        raise EmptyCorpus("difficulty calibration needs at least one image")
    ranked: list[tuple[float, int]] = []
    for pi, plan in enumerate(candidate_plans):
        drifts = []
        for img in corpus:
            before = gist_descriptor(img, DEFAULT_GIST)
            after = gist_descriptor(augment_image(img, plan), DEFAULT_GIST)
            drifts.append(descriptor_drift(before, after))
        ranked.append((float(np.mean(drifts)), pi))
    ranked.sort()
    n = len(ranked)
    level_by_index: dict[int, str] = {}
    for rank, (_drift, pi) in enumerate(ranked):
        level_by_index[pi] = LEVELS[min(3, (4 * rank) // n)]
    return {plan: level_by_index[pi] for pi, plan in enumerate(candidate_plans)}


# --- near-duplicate pre-filtering ---------------------------------------------


def dedup_references(images: list[ImageBuffer], tau: float) -> tuple[list[str], list[tuple[str, str]]]:
    """Drop near-duplicate references.

    Any pair of images with descriptor distance strictly below tau joins
    one cluster; the lexicographically-first id of each cluster is kept.
    Returns (kept ids in input order, (kept, removed) pairs).
    """
    if tau < 0:
        raise InvalidParams(f"tau must be >= 0, got {tau}")
    ids = [img.id for img in images]
    vecs = [gist_descriptor(img, DEFAULT_GIST).values.astype(np.float64) for img in images]

    parent = list(range(len(ids)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            d = float(np.linalg.norm(vecs[i] - vecs[j]))
            if d < tau:
                parent[find(j)] = find(i)

    rep: dict[int, str] = {}
    for i, rid in enumerate(ids):
        root = find(i)
        if root not in rep or rid < rep[root]:
            rep[root] = rid
    kept = [rid for i, rid in enumerate(ids) if rep[find(i)] == rid]
    removed = sorted(
        (rep[find(i)], rid) for i, rid in enumerate(ids) if rep[find(i)] != rid
    )
    return kept, removed


# --- procedural imagery --------------------------------------------------------


def synth_scene(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    """A busy synthetic scene: gradient sky, waves, and layered shapes."""
    c0 = rng.integers(30, 226, size=3).astype(np.float64)
    c1 = rng.integers(30, 226, size=3).astype(np.float64)
    ty = np.linspace(0.0, 1.0, h)[:, None]
    tx = np.linspace(0.0, 1.0, w)[None, :]
    mix = float(rng.random())
    ramp = mix * ty + (1.0 - mix) * tx
    img = c0[None, None, :] + ramp[:, :, None] * (c1 - c0)[None, None, :]

    fy, fx = rng.uniform(1.0, 4.0, size=2)
    ph = rng.uniform(0.0, 2.0 * np.pi, size=2)
    img += (18.0 * np.sin(2 * np.pi * fy * ty + ph[0]) * np.cos(2 * np.pi * fx * tx + ph[1]))[:, :, None]

    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    for _ in range(int(rng.integers(4, 9))):
        color = rng.integers(0, 256, size=3).astype(np.float64)
        kind = int(rng.integers(0, 3))
        if kind == 0:
            cy, cx = rng.uniform(0, h), rng.uniform(0, w)
            ry = rng.uniform(0.06, 0.24) * h
            rx = rng.uniform(0.06, 0.24) * w
            hit = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
        elif kind == 1:
            y0, x0 = rng.uniform(0, h * 0.8), rng.uniform(0, w * 0.8)
            hh, ww = rng.uniform(0.1, 0.35) * h, rng.uniform(0.1, 0.35) * w
            hit = (yy >= y0) & (yy < y0 + hh) & (xx >= x0) & (xx < x0 + ww)
        else:
            theta = rng.uniform(0.0, np.pi)
            offset = rng.uniform(-0.4, 0.4) * min(h, w)
            width = rng.uniform(0.02, 0.08) * min(h, w)
            d = (yy - h / 2) * np.cos(theta) + (xx - w / 2) * np.sin(theta)
            hit = np.abs(d - offset) < width
        blend = rng.uniform(0.45, 0.9)
        img[hit] = (1.0 - blend) * img[hit] + blend * color

    img += rng.normal(0.0, 2.0, size=img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def synth_object_card(rng: np.random.Generator, h: int, w: int) -> tuple[np.ndarray, BinaryMask]:
    """One large textured object on a plain light background.

    Returns the image and the object's mask; these serve as splicing
    donors whose cut-out segment still resembles the whole donor image.
    """
    bg = rng.integers(185, 240, size=3).astype(np.float64)
    img = bg[None, None, :] + rng.normal(0.0, 1.5, size=(h, w, 3))

    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    cy = h / 2 + rng.uniform(-0.05, 0.05) * h
    cx = w / 2 + rng.uniform(-0.05, 0.05) * w
    ry = rng.uniform(0.36, 0.45) * h
    rx = rng.uniform(0.36, 0.45) * w
    mask = (((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2) <= 1.0

    base_color = rng.integers(10, 150, size=3).astype(np.float64)
    alt_color = rng.integers(40, 200, size=3).astype(np.float64)
    theta = rng.uniform(0.0, np.pi)
    freq = rng.uniform(3.0, 7.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    stripe = np.sin(2 * np.pi * freq * ((xx * np.cos(theta) + yy * np.sin(theta)) / max(h, w)) + phase) > 0
    body = np.where(stripe[:, :, None], base_color[None, None, :], alt_color[None, None, :])
    img = np.where(mask[:, :, None], body, img)

    img += rng.normal(0.0, 1.5, size=img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8), BinaryMask(mask.astype(np.uint8))


def ellipse_mask(h: int, w: int, cy: float, cx: float, ry: float, rx: float) -> BinaryMask:
    """Filled ellipse as a BinaryMask; clipped to the canvas."""
    if ry <= 0 or rx <= 0:
        raise InvalidParams(f"ellipse radii must be positive, got {ry}, {rx}")
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    bits = (((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2) <= 1.0
    return BinaryMask(bits.astype(np.uint8))


def random_copy_move_recipe(rng: np.random.Generator, img: ImageBuffer) -> ForgeryRecipe:
    """Sample a plausible copy-move: an ellipse region pasted elsewhere."""
    h, w = img.height, img.width
    r_frac = rng.uniform(0.10, 0.32)
    ry = max(2.0, r_frac * h * rng.uniform(0.8, 1.2))
    rx = max(2.0, r_frac * w * rng.uniform(0.8, 1.2))
    ry = min(ry, h * 0.42)
    rx = min(rx, w * 0.42)
    cy = rng.uniform(ry, h - ry)
    cx = rng.uniform(rx, w - rx)
    mask = ellipse_mask(h, w, cy, cx, ry, rx)

    if rng.random() < 0.5:
        alpha, scale = 1.0, (1.0 if rng.random() < 0.5 else float(rng.uniform(0.7, 1.25)))
    else:
        alpha, scale = float(rng.uniform(0.7, 0.95)), float(rng.uniform(0.7, 1.25))

    x, y, bw, bh = _tight_bbox(mask.bits)
    ow = max(1, int(round(bw * scale)))
    oh = max(1, int(round(bh * scale)))
    if ow >= w or oh >= h:
        scale = min((w - 1) / bw, (h - 1) / bh) * 0.9
        ow = max(1, int(round(bw * scale)))
        oh = max(1, int(round(bh * scale)))
    src_box = (x, y, bw, bh)
    placement = None
    for _ in range(12):
        dx = int(rng.integers(0, w - ow + 1))
        dy = int(rng.integers(0, h - oh + 1))
        overlap_x = max(0, min(dx + ow, src_box[0] + src_box[2]) - max(dx, src_box[0]))
        overlap_y = max(0, min(dy + oh, src_box[1] + src_box[3]) - max(dy, src_box[1]))
        placement = (dx, dy)
        if overlap_x * overlap_y == 0:
            break
    return ForgeryRecipe(
        kind=ForgeryType.CopyMove,
        source_id=img.id,
        object_mask=mask,
        placement=placement,
        scale=float(scale),
        alpha=alpha,
    )


def random_splicing_recipe(
    rng: np.random.Generator,
    target: ImageBuffer,
    donor: ImageBuffer,
    donor_mask: BinaryMask,
) -> ForgeryRecipe:
    """Sample a splice: the donor's object scaled down into the target."""
    x, y, bw, bh = _tight_bbox(donor_mask.bits)
    limit = min((target.width - 1) / bw, (target.height - 1) / bh)
    scale = float(rng.uniform(0.35, 0.55)) * limit
    ow = max(1, int(round(bw * scale)))
    oh = max(1, int(round(bh * scale)))
    dx = int(rng.integers(0, target.width - ow + 1))
    dy = int(rng.integers(0, target.height - oh + 1))
    alpha = 1.0 if rng.random() < 0.5 else float(rng.uniform(0.8, 0.97))
    return ForgeryRecipe(
        kind=ForgeryType.ImageSplicing,
        source_id=target.id,
        donor_id=donor.id,
        object_mask=donor_mask,
        placement=(dx, dy),
        scale=scale,
        alpha=alpha,
    )


# --- dataset emission -----------------------------------------------------------


def item_rng(master_seed: int, item_id: str) -> np.random.Generator:
    """Independent per-item generator: order- and thread-invariant."""
    digest = hashlib.blake2b(f"{master_seed}:{item_id}".encode(), digest_size=8).digest()
    return np.random.default_rng(int.from_bytes(digest, "little"))


@dataclass(frozen=True)
class DatasetConfig:
    """Desk-scale counts and knobs for emit_dataset_layout."""

    reference_count: int = 200
    training_count: int = 200
    query_count: int = 40
    segment_count: int = 20
    image_edge: int = 128
    master_seed: int = 0
    card_every: int = 5  # every n-th reference is a plain-background object card

    def __post_init__(self) -> None:
        if min(self.reference_count, self.training_count, self.query_count, self.segment_count) < 0:
            raise InvalidParams("counts must be >= 0")
        if self.image_edge < 16:
            raise InvalidParams(f"image_edge too small: {self.image_edge}")
        if self.card_every < 2:
            raise InvalidParams("card_every must be >= 2")


FOLDERS = ("Reference", "Training", "Query", "AugmentedQuery", "Originals", "Segments", "Annotations")


def _query_mix(n: int) -> tuple[int, int, int]:
    """(copy-move, splicing, distractor) counts: 40% / 40% / rest."""
    cm = (2 * n) // 5
    sp = (2 * n) // 5
    return cm, sp, n - cm - sp


def emit_dataset_layout(root: str | Path, config: DatasetConfig = DatasetConfig(), threads: int = 1) -> dict:
    """Generate the seven-folder dataset at ``root``.

    Query composition: 40% copy-move (one original), 40% splicing
    (two originals: target + donor), and the remainder distractors
    (forged from held-out sources, zero originals). Each forged query
    also gets one dimension-preserving augmented variant inheriting its
    parent's ground truth. Fully reproducible from config.master_seed
    regardless of thread count.
    """
    root = Path(root)
    for name in FOLDERS:
        (root / name).mkdir(parents=True, exist_ok=True)
    (root / "Annotations" / "masks").mkdir(exist_ok=True)

    edge = config.image_edge
    seed = config.master_seed

    # references: busy scenes, with object cards interleaved for donors
    card_ids: list[str] = []
    scene_ids: list[str] = []
    card_masks: dict[str, BinaryMask] = {}

    def make_reference(i: int) -> tuple[str, np.ndarray, BinaryMask | None]:
        rid = f"ref_{i:04d}"
        rng = item_rng(seed, rid)
        if i % config.card_every == config.card_every - 1:
            px, mask = synth_object_card(rng, edge, edge)
            return rid, px, mask
        return rid, synth_scene(rng, edge, edge), None

    def write_image(folder: str, stem: str, px: np.ndarray) -> None:
        save_image(ImageBuffer(px, id=stem), root / folder / f"{stem}.png")

    ref_jobs = [make_reference(i) for i in range(config.reference_count)]
    for rid, px, mask in ref_jobs:
        if mask is not None:
            card_ids.append(rid)
            card_masks[rid] = mask
        else:
            scene_ids.append(rid)

    def emit_reference(job: tuple[str, np.ndarray, BinaryMask | None]) -> None:
        rid, px, _mask = job
        write_image("Reference", rid, px)

    def emit_training(i: int) -> None:
        tid = f"trn_{i:04d}"
        write_image("Training", tid, synth_scene(item_rng(seed, tid), edge, edge))

    ref_by_id = {rid: px for rid, px, _m in ref_jobs}
    n_cm, n_sp, n_dist = _query_mix(config.query_count)
    assign_rng = item_rng(seed, "assignment")
    if config.query_count:
        if n_cm + n_sp > 0 and not scene_ids:
            raise InvalidParams("no scene references available for forgery sources")
        if n_sp > 0 and not card_ids:
            raise InvalidParams("no object-card references available as splicing donors")
    cm_sources = [scene_ids[int(k)] for k in assign_rng.choice(len(scene_ids), size=n_cm, replace=False)] if n_cm else []
    sp_targets = [scene_ids[int(k)] for k in assign_rng.choice(len(scene_ids), size=n_sp, replace=False)] if n_sp else []
    sp_donors = [card_ids[int(k)] for k in (assign_rng.choice(len(card_ids), size=n_sp, replace=len(card_ids) < n_sp))] if n_sp else []

    plans = mild_plans()
    gt_pairs: dict[str, set[str]] = {}
    proportions: dict[str, float] = {}
    annotations: dict[str, dict] = {}
    query_masks: dict[str, BinaryMask] = {}
    forged_by_id: dict[str, ImageBuffer] = {}

    def build_query(qi: int) -> tuple[str, ImageBuffer, BinaryMask, list[str], str]:
        qid = f"qry_{qi:04d}"
        rng = item_rng(seed, qid)
        if qi < n_cm:
            src_id = cm_sources[qi]
            src = ImageBuffer(ref_by_id[src_id], id=src_id)
            recipe = random_copy_move_recipe(rng, src)
            forged, mask = generate_copy_move(src, recipe)
            return qid, forged.with_id(qid), mask, [src_id], ForgeryType.CopyMove.canonical
        if qi < n_cm + n_sp:
            k = qi - n_cm
            tgt_id, don_id = sp_targets[k], sp_donors[k]
            tgt = ImageBuffer(ref_by_id[tgt_id], id=tgt_id)
            don = ImageBuffer(ref_by_id[don_id], id=don_id)
            recipe = random_splicing_recipe(rng, tgt, don, card_masks[don_id])
            forged, mask = generate_splicing(tgt, don, recipe)
            return qid, forged.with_id(qid), mask, [tgt_id, don_id], ForgeryType.ImageSplicing.canonical
        held_out = ImageBuffer(synth_scene(rng, edge, edge), id=f"held_{qi:04d}")
        recipe = random_copy_move_recipe(rng, held_out)
        forged, mask = generate_copy_move(held_out, recipe)
        return qid, forged.with_id(qid), mask, [], ForgeryType.CopyMove.canonical

    def emit_query(qi: int) -> tuple[str, BinaryMask, list[str], str, ImageBuffer]:
        qid, forged, mask, originals, tname = build_query(qi)
        save_image(forged, root / "Query" / f"{qid}.png")
        save_mask(mask, root / "Annotations" / "masks" / f"{qid}.png")

        plan = plans[qi % len(plans)]
        aug_seed = int.from_bytes(
            hashlib.blake2b(f"{seed}:{qid}:aug".encode(), digest_size=8).digest(), "little"
        )
        aug = augment_image(forged, plan.with_seed(aug_seed)).with_id(f"{qid}_aug")
        save_image(aug, root / "AugmentedQuery" / f"{qid}_aug.png")
        return qid, mask, originals, tname, forged

    query_results = []
    training_indices = list(range(config.training_count))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(emit_reference, ref_jobs))
            list(pool.map(emit_training, training_indices))
            query_results = list(pool.map(emit_query, range(config.query_count)))
    else:
        for job in ref_jobs:
            emit_reference(job)
        for i in training_indices:
            emit_training(i)
        query_results = [emit_query(qi) for qi in range(config.query_count)]

    for qid, mask, originals, tname, forged in sorted(query_results, key=lambda t: t[0]):
        gt_pairs[qid] = set(originals)
        prop = forgery_proportion(mask)
        proportions[qid] = prop
        x, y, bw, bh = _tight_bbox(mask.bits)
        ann = {
            "forged": True,
            "type": tname,
            "mask": f"masks/{qid}.png",
            "bbox": [x, y, bw, bh],
            "proportion": prop,
            "originals": sorted(originals),
        }
        annotations[qid] = ann
        aug_id = f"{qid}_aug"
        gt_pairs[aug_id] = set(originals)
        proportions[aug_id] = prop
        annotations[aug_id] = {**ann, "augmented_from": qid}
        query_masks[qid] = mask
        forged_by_id[qid] = forged

    for qid, ann in annotations.items():
        (root / "Annotations" / f"{qid}.json").write_text(
            json.dumps(ann, sort_keys=True, indent=2) + "\n"
        )

    # Originals: the reference images queries actually derive from
    used_refs = sorted({r for refs in gt_pairs.values() for r in refs})
    for rid in used_refs:
        data = (root / "Reference" / f"{rid}.png").read_bytes()
        (root / "Originals" / f"{rid}.png").write_bytes(data)

    # Segments: crops cut from forged queries' masks
    emitted = 0
    for qid in sorted(query_masks):
        if emitted >= config.segment_count:
            break
        for seg in extract_segments(forged_by_id[qid], query_masks[qid]):
            if emitted >= config.segment_count:
                break
            save_segment(seg, root / "Segments", f"seg_{emitted:04d}")
            emitted += 1

    gt = GroundTruthTable({q: frozenset(refs) for q, refs in gt_pairs.items()})
    write_gt_csv(root / "Annotations" / "gt.csv", gt)
    write_proportions_csv(root / "Annotations" / "proportions.csv", proportions)

    metadata = {
        "conventions": {
            "alpha_blending": "feathered mask edges only when alpha < 1; alpha = 1 is an exact paste",
            "augmented_queries": "inherit the parent query's originals; plans are dimension-preserving",
            "copy_move_mask": "destination footprint only",
        },
        "counts": {
            "augmented_query": config.query_count,
            "query": config.query_count,
            "query_copy_move": n_cm,
            "query_distractor": n_dist,
            "query_splicing": n_sp,
            "reference": config.reference_count,
            "segments": emitted,
            "training": config.training_count,
        },
        "image_edge": edge,
        "master_seed": seed,
    }
    (root / "Annotations" / "metadata.json").write_text(
        json.dumps(metadata, sort_keys=True, indent=2) + "\n"
    )
    return metadata
