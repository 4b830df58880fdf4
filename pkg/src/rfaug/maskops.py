"""Mask geometry: areas, overlap, dilation, crops, padding.

Masks are uint8 arrays holding exactly {0, 1}; images are uint8 (H, W, 3)
RGB. All functions are pure and never write to their inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatchError, EmptyMaskError, InvalidBoxError

# edge length of the square canvas used when comparing silhouettes
NORMALIZE_CANVAS = 128


@dataclass(frozen=True)
class StructuringElement:
    """An all-ones square window of odd edge length."""

    size: int = 7

    def __post_init__(self):
        if self.size < 1 or self.size % 2 == 0:
            raise ValueError(f"structuring element size must be odd and >= 1, got {self.size}")

    @property
    def radius(self) -> int:
        return (self.size - 1) // 2


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box with inclusive corners."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise InvalidBoxError(f"degenerate box {self}")
        if min(self.x0, self.y0) < 0:
            raise InvalidBoxError(f"negative corner in {self}")

    @property
    def width(self) -> int:
        return self.x1 - self.x0 + 1

    @property
    def height(self) -> int:
        return self.y1 - self.y0 + 1


def require_mask(mask: np.ndarray) -> np.ndarray:
    """Check that an array is a 2-d uint8 {0,1} mask and return it."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-d, got shape {mask.shape}")
    if mask.dtype != np.uint8:
        raise ValueError(f"mask dtype must be uint8, got {mask.dtype}")
    return mask


def mask_area(mask: np.ndarray) -> int:
    return int(np.count_nonzero(require_mask(mask)))


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two same-shaped masks; 0.0 if both empty."""
    a = require_mask(a)
    b = require_mask(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"mask shapes differ: {a.shape} vs {b.shape}")
    inter = int(np.count_nonzero(a & b))
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 0.0
    return inter / union


def mask_bbox(mask: np.ndarray) -> BoundingBox:
    """Tight bounding box of the set bits."""
    mask = require_mask(mask)
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise EmptyMaskError("cannot take the bounding box of an empty mask")
    return BoundingBox(int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))


def dilate(mask: np.ndarray, element: StructuringElement | int = 7) -> np.ndarray:
    """Binary dilation by an all-ones square window.

    element may be a StructuringElement or a bare odd edge length. Bits
    outside the raster are treated as zero, so the result never grows the
    array. Size 1 returns an identical copy.
    """
    mask = require_mask(mask)
    if isinstance(element, int):
        element = StructuringElement(element)
    return kernels.dilate_bits(mask, element.radius)


def crop_resize_preserve_aspect(
    src: np.ndarray, box: BoundingBox, target: tuple[int, int]
) -> np.ndarray:
    """Crop src to box and scale into a target (width, height) canvas.

    The crop is scaled by the minimum axis ratio so its aspect survives,
    centred, and letterboxed with zeros. Images resample bilinearly; masks
    use nearest neighbour and are re-binarized. A crop already at the
    target size comes back bit-identical.
    """
    tw, th = target
    if tw < 1 or th < 1:
        raise ValueError(f"target must be positive, got {target}")
    src = np.asarray(src)
    h, w = src.shape[:2]
    if box.x1 >= w or box.y1 >= h:
        raise InvalidBoxError(f"{box} exceeds raster {w}x{h}")
    crop = src[box.y0 : box.y1 + 1, box.x0 : box.x1 + 1]
    cw = box.width
    ch = box.height
    scale = min(tw / cw, th / ch)
    sw = min(tw, max(1, int(cw * scale + 0.5)))
    sh = min(th, max(1, int(ch * scale + 0.5)))
    ox = (tw - sw) // 2
    oy = (th - sh) // 2
    if src.ndim == 3:
        scaled = kernels.round_to_u8(kernels.resize_bilinear(crop.astype(np.float64), sh, sw))
        canvas = np.zeros((th, tw, src.shape[2]), dtype=np.uint8)
    elif src.ndim == 2:
        scaled = (kernels.resize_nearest(crop, sh, sw) > 0).astype(np.uint8)
        canvas = np.zeros((th, tw), dtype=np.uint8)
    else:
        raise ValueError(f"expected a 2-d mask or 3-d image, got shape {src.shape}")
    canvas[oy : oy + sh, ox : ox + sw] = scaled
    return canvas


def normalize_silhouette(mask: np.ndarray, canvas: int = NORMALIZE_CANVAS) -> np.ndarray:
    """Bbox-crop a mask and fit it onto a square canvas for shape comparison."""
    return crop_resize_preserve_aspect(mask, mask_bbox(mask), (canvas, canvas))


def replicate_pad_to_square(
    image: np.ndarray, mask: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Pad an image and its mask to a square plate.

    The image replicates its edge rows/columns into the border; the mask
    pads with zeros. Padding is centred, with the extra row or column of an
    odd difference going after. Square input comes back as plain copies.
    """
    mask = require_mask(mask)
    image = np.asarray(image)
    if image.shape[:2] != mask.shape:
        raise DimensionMismatchError(
            f"image {image.shape[:2]} and mask {mask.shape} shapes differ"
        )
    h, w = mask.shape
    side = max(h, w)
    top = (side - h) // 2
    bottom = side - h - top
    left = (side - w) // 2
    right = side - w - left
    if top == bottom == left == right == 0:
        return image.copy(), mask.copy()
    pimg = np.pad(image, ((top, bottom), (left, right), (0, 0)), mode="edge")
    pmask = np.pad(mask, ((top, bottom), (left, right)), mode="constant")
    return pimg, pmask
