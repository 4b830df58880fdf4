"""Composite assembly: place one record's region of interest onto another
record's repaired background.

Pipeline for a recipe (i = ROI donor, j = background donor):

1. load both images and masks, pad each to a square plate (image pixels
   replicate at the edges, mask pads with zeros);
2. pick the effective masks for the mode: the full silhouettes, or the
   upper portions of each after an identical bbox-row split;
3. dilate j's effective mask by a 7x7 square window and repair that hole in
   j's plate by marching inward from the rim;
4. crop i's plate to its effective mask bbox, scale it by the minimum axis
   ratio into j's effective mask bbox, centred;
5. write i's pixels through the scaled mask onto the repaired plate.

The output keeps i's label: every foreground pixel is i's, so the identity
evidence in the frame belongs to i alone.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CompositionOverflowError, EmptyMaskError, IncompatiblePairError
from .inpaint import DEFAULT_RADIUS, InpaintRequest, inpaint
from .manifest import stable_digest
from .maskops import (
    BoundingBox,
    StructuringElement,
    dilate,
    mask_bbox,
    replicate_pad_to_square,
    require_mask,
)
from .model import DatasetIndex
from .pairing import CompositeRecipe, PairingConfig, PairScratch, classify_pair

DILATION_SIZE = 7
DEFAULT_SPLIT_FRACTION = 0.5


@dataclass(frozen=True)
class SyntheticSample:
    """A finished composite plus its provenance."""

    image: np.ndarray
    label: str
    recipe: CompositeRecipe
    provenance: str


def split_mask_rows(mask: np.ndarray, fraction: float) -> tuple[np.ndarray, np.ndarray]:
    """Split a mask into upper and lower parts at a bbox row.

    The split row sits fraction of the way down the tight bbox, rounded to
    the nearest row and clamped so the upper part keeps at least the bbox's
    top row. Upper and lower are disjoint and union back to the input.
    """
    mask = require_mask(mask)
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie strictly inside (0, 1), got {fraction}")
    box = mask_bbox(mask)
    offset = int(fraction * box.height + 0.5)
    offset = max(1, min(box.height - 1, offset)) if box.height > 1 else 1
    split_row = box.y0 + offset
    upper = mask.copy()
    upper[split_row:, :] = 0
    lower = mask.copy()
    lower[:split_row, :] = 0
    return upper, lower


def _paste_region(plate: np.ndarray, box: BoundingBox, image: np.ndarray, bits: np.ndarray):
    h, w = plate.shape[:2]
    if box.x1 >= w or box.y1 >= h:
        raise CompositionOverflowError(f"target {box} exceeds plate {w}x{h}")
    region = plate[box.y0 : box.y1 + 1, box.x0 : box.x1 + 1]
    sel = bits != 0
    region[sel] = image[sel]


def compose(
    recipe: CompositeRecipe,
    index: DatasetIndex,
    cfg: PairingConfig,
    *,
    split_fraction: float = DEFAULT_SPLIT_FRACTION,
    inpaint_radius: int = DEFAULT_RADIUS,
    feather: int = 0,
    scratch: PairScratch | None = None,
    enforce_constraints: bool = True,
) -> SyntheticSample:
    """Build the composite a recipe describes.

    With enforce_constraints the pair is re-checked against cfg and an
    incompatible pair raises rather than composing. feather > 0 blends the
    pasted edge over that many pixels instead of hard-cutting it; the
    default of 0 writes ROI pixels through the mask verbatim.
    """
    ri = index.record(recipe.roi_source)
    rj = index.record(recipe.bg_source)
    if recipe.label and recipe.label != ri.label:
        raise ValueError(
            f"recipe label {recipe.label!r} contradicts donor label {ri.label!r}"
        )
    if not ri.label:
        raise ValueError(f"record {ri.sample_id!r} has no label and cannot donate a ROI")
    if enforce_constraints:
        reason = classify_pair(ri, rj, cfg, scratch)
        if reason is not None:
            raise IncompatiblePairError(
                f"pair ({ri.sample_id}, {rj.sample_id}) fails the {reason} gate",
                reason=reason,
            )
    elif ri.area == 0 or rj.area == 0:
        raise EmptyMaskError("both records need non-empty masks to compose")

    img_i, mask_i = replicate_pad_to_square(ri.load_image(), ri.load_mask())
    img_j, mask_j = replicate_pad_to_square(rj.load_image(), rj.load_mask())

    if recipe.roi_mode == "upper_body":
        roi_bits, _ = split_mask_rows(mask_i, split_fraction)
        hole_bits, _ = split_mask_rows(mask_j, split_fraction)
    else:
        roi_bits = mask_i
        hole_bits = mask_j
    if not roi_bits.any():
        raise EmptyMaskError(f"effective ROI of {ri.sample_id!r} is empty")
    if not hole_bits.any():
        raise EmptyMaskError(f"effective region of {rj.sample_id!r} is empty")

    hole = dilate(hole_bits, StructuringElement(DILATION_SIZE))
    plate = inpaint(InpaintRequest(image=img_j, hole=hole, radius=inpaint_radius))

    target_box = mask_bbox(hole_bits)
    src_box = mask_bbox(roi_bits)
    crop_img = img_i[src_box.y0 : src_box.y1 + 1, src_box.x0 : src_box.x1 + 1]
    crop_bits = roi_bits[src_box.y0 : src_box.y1 + 1, src_box.x0 : src_box.x1 + 1]
    tw = target_box.width
    th = target_box.height
    scale = min(tw / src_box.width, th / src_box.height)
    sw = min(tw, max(1, int(src_box.width * scale + 0.5)))
    sh = min(th, max(1, int(src_box.height * scale + 0.5)))
    scaled_img = kernels.round_to_u8(
        kernels.resize_bilinear(crop_img.astype(np.float64), sh, sw)
    )
    scaled_bits = (kernels.resize_nearest(crop_bits, sh, sw) > 0).astype(np.uint8)
    x0 = target_box.x0 + (tw - sw) // 2
    y0 = target_box.y0 + (th - sh) // 2
    place_box = BoundingBox(x0, y0, x0 + sw - 1, y0 + sh - 1)

    out = plate.copy()
    if feather > 0:
        _paste_feathered(out, place_box, scaled_img, scaled_bits, feather)
    else:
        _paste_region(out, place_box, scaled_img, scaled_bits)
    out.setflags(write=False)

    provenance = stable_digest(
        {
            "roi_source": recipe.roi_source,
            "bg_source": recipe.bg_source,
            "roi_mode": recipe.roi_mode,
            "label": ri.label,
            "split_fraction": split_fraction,
            "inpaint_radius": inpaint_radius,
            "feather": feather,
            "pairing": cfg.to_dict(),
        }
    )
    return SyntheticSample(image=out, label=ri.label, recipe=recipe, provenance=provenance)


def _erode_once(bits: np.ndarray) -> np.ndarray:
    # 3x3 erosion with zeros outside the raster, so a silhouette touching
    # the region border still feathers there
    padded = np.pad(bits, 1, mode="constant")
    h, w = bits.shape
    out = np.ones_like(bits)
    for dy in range(3):
        for dx in range(3):
            out &= padded[dy : dy + h, dx : dx + w]
    return out


def _paste_feathered(
    plate: np.ndarray, box: BoundingBox, image: np.ndarray, bits: np.ndarray, feather: int
):
    h, w = plate.shape[:2]
    if box.x1 >= w or box.y1 >= h:
        raise CompositionOverflowError(f"target {box} exceeds plate {w}x{h}")
    # alpha ramps from 1/(feather+1) at the mask rim up to 1 in its interior
    alpha = bits.astype(np.float64)
    inner = bits
    for _ in range(feather):
        inner = _erode_once(inner)
        alpha += inner
    alpha /= feather + 1
    region = plate[box.y0 : box.y1 + 1, box.x0 : box.x1 + 1]
    blended = (1.0 - alpha[..., None]) * region + alpha[..., None] * image
    sel = bits != 0
    region[sel] = kernels.round_to_u8(blended)[sel]
