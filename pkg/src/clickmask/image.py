"""Grayscale image container, mask IO, and the grid utilities shared by all modules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.ndimage as ndi
from PIL import Image, UnidentifiedImageError


class ImageLoadError(Exception):
    """Raised when a raster file cannot be read or has an unsupported format."""


@dataclass
class GrayImage:
    """Normalized grayscale intensity grid; values are original 8-bit counts / 255."""

    data: np.ndarray  # float64, shape (height, width), values in [0, 1]

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2 or self.data.size == 0:
            raise ValueError("GrayImage requires a nonempty 2-D intensity grid")
        if self.data.min() < 0.0 or self.data.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def crop(self, top: int, left: int, height: int, width: int) -> "GrayImage":
        return GrayImage(self.data[top:top + height, left:left + width].copy())


@dataclass
class BinaryMask:
    """Boolean foreground mask; True marks target pixels."""

    data: np.ndarray  # bool, shape (height, width)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=bool)
        if self.data.ndim != 2 or self.data.size == 0:
            raise ValueError("BinaryMask requires a nonempty 2-D boolean grid")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def count(self) -> int:
        return int(self.data.sum())


@dataclass
class Component:
    id: int
    area: int
    centroid: tuple[float, float]       # (row, col), arithmetic mean of member pixels
    bbox: tuple[int, int, int, int]     # (top, left, height, width)


@dataclass
class ComponentSet:
    labels: np.ndarray                  # int32, 0 = background
    components: list[Component] = field(default_factory=list)


def load_image(path) -> GrayImage:
    """Load an 8-bit PNG or binary PGM (P5) as a normalized grayscale image.

    RGB rasters are converted by averaging the three channels.
    """
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("L", "P"):
                arr = np.asarray(im.convert("L"), dtype=np.float64)
            elif mode in ("RGB", "RGBA"):
                rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
                arr = rgb.mean(axis=2)
            elif mode == "1":
                arr = np.asarray(im.convert("L"), dtype=np.float64)
            else:
                raise ImageLoadError(f"unsupported bit depth or mode {mode!r} in {path}")
    except ImageLoadError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise ImageLoadError(f"unreadable file {path}: {exc}") from exc
    return GrayImage(arr / 255.0)


def save_mask(mask: BinaryMask, path) -> None:
    """Write a mask as an 8-bit single-channel PNG (foreground 255, background 0)."""
    arr = np.where(mask.data, 255, 0).astype(np.uint8)
    try:
        Image.fromarray(arr, mode="L").save(path, format="PNG")
    except (OSError, ValueError) as exc:
        raise ImageLoadError(f"cannot write mask to {path}: {exc}") from exc


def load_mask(path) -> BinaryMask:
    """Load a mask PNG written by save_mask (any value > 127 counts as foreground)."""
    return BinaryMask(load_image(path).data > 0.5)


def gradient(fld: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference gradient with replicated edges (zero-flux boundary).

    Returns (gx, gy): gx is the horizontal (column) derivative, gy the vertical.
    """
    fld = np.asarray(fld, dtype=np.float64)
    if fld.ndim != 2 or fld.shape[0] < 2 or fld.shape[1] < 2:
        raise ValueError("gradient requires a field of at least 2x2")
    p = np.pad(fld, 1, mode="edge")
    gx = (p[1:-1, 2:] - p[1:-1, :-2]) * 0.5
    gy = (p[2:, 1:-1] - p[:-2, 1:-1]) * 0.5
    return gx, gy


_DISK_OFFSETS: dict[float, list[tuple[int, int]]] = {}


def disk_offsets(radius: float) -> list[tuple[int, int]]:
    """Integer offsets (dy, dx) with dy^2 + dx^2 < (radius + 0.5)^2.

    The squared distances are integers, so the half-integer threshold is exact.
    """
    key = round(float(radius), 6)
    if key not in _DISK_OFFSETS:
        r = int(np.floor(radius + 0.5))
        lim = (radius + 0.5) ** 2
        offs = [(dy, dx)
                for dy in range(-r, r + 1)
                for dx in range(-r, r + 1)
                if dy * dy + dx * dx < lim]
        _DISK_OFFSETS[key] = offs
    return _DISK_OFFSETS[key]


def dilate_bits(bits: np.ndarray, radius: float) -> np.ndarray:
    """Dilation of a boolean grid by a Euclidean disk (distance < radius + 0.5)."""
    bits = np.asarray(bits, dtype=bool)
    if radius <= 0:
        return bits.copy()
    h, w = bits.shape
    out = np.zeros_like(bits)
    for dy, dx in disk_offsets(radius):
        if abs(dy) >= h or abs(dx) >= w:
            continue
        ys = slice(max(0, dy), min(h, h + dy))
        yd = slice(max(0, -dy), min(h, h - dy))
        xs = slice(max(0, dx), min(w, w + dx))
        xd = slice(max(0, -dx), min(w, w - dx))
        out[yd, xd] |= bits[ys, xs]
    return out


def dilate(mask: BinaryMask, radius: float) -> BinaryMask:
    """Dilate a mask by a disk structuring element; radius 0 is the identity."""
    if radius < 0:
        raise ValueError("dilate radius must be >= 0")
    return BinaryMask(dilate_bits(mask.data, radius))


_STRUCT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCT_8 = np.ones((3, 3), dtype=bool)


def connected_components(mask: BinaryMask, connectivity: int = 8) -> ComponentSet:
    """Label foreground components with deterministic raster-order ids.

    Labeling itself is delegated to scipy.ndimage; ids are then remapped so that
    component 1 is the first encountered scanning row-major, component 2 the next,
    and so on.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    structure = _STRUCT_4 if connectivity == 4 else _STRUCT_8
    raw, n = ndi.label(mask.data, structure=structure)
    if n == 0:
        return ComponentSet(labels=np.zeros_like(raw, dtype=np.int32))

    flat = raw.ravel()
    nz = np.flatnonzero(flat)
    # first raster-order occurrence of each raw label
    first = np.full(n + 1, flat.size, dtype=np.int64)
    np.minimum.at(first, flat[nz], nz)
    order = np.argsort(first[1:], kind="stable") + 1
    remap = np.zeros(n + 1, dtype=np.int32)
    remap[order] = np.arange(1, n + 1, dtype=np.int32)
    labels = remap[raw]

    areas = np.bincount(labels.ravel(), minlength=n + 1)
    rows, cols = np.nonzero(labels)
    vals = labels[rows, cols]
    row_sum = np.bincount(vals, weights=rows, minlength=n + 1)
    col_sum = np.bincount(vals, weights=cols, minlength=n + 1)

    comps = []
    for cid in range(1, n + 1):
        sel = vals == cid
        r = rows[sel]
        c = cols[sel]
        comps.append(Component(
            id=cid,
            area=int(areas[cid]),
            centroid=(row_sum[cid] / areas[cid], col_sum[cid] / areas[cid]),
            bbox=(int(r.min()), int(c.min()),
                  int(r.max() - r.min() + 1), int(c.max() - c.min() + 1)),
        ))
    return ComponentSet(labels=labels, components=comps)
