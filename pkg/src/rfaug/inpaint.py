"""Seam repair: fill masked-out pixels by marching inward from the rim.

The fill front moves in order of arrival time from the hole boundary, and
each pixel becomes a normalized weighted average of the already-known
pixels inside a small ball, weighted by direction against the front normal,
geometric distance, and arrival-time proximity. The result depends only on
the inputs: ties in the march order break on row-major pixel position, so
repeated runs are byte-identical.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatchError, FullMaskError
from .maskops import require_mask

DEFAULT_RADIUS = 5


@dataclass(frozen=True)
class InpaintRequest:
    """An image, the hole to repair, and the neighbourhood radius."""

    image: np.ndarray
    hole: np.ndarray
    radius: int = DEFAULT_RADIUS

    def __post_init__(self):
        image = np.asarray(self.image)
        hole = require_mask(self.hole)
        if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
            raise ValueError(f"image must be uint8 (H, W, 3), got {image.dtype} {image.shape}")
        if image.shape[:2] != hole.shape:
            raise DimensionMismatchError(
                f"image {image.shape[:2]} and hole {hole.shape} shapes differ"
            )
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")


def inpaint(request: InpaintRequest) -> np.ndarray:
    """Return a new image with the hole filled.

    Pixels outside the hole are bit-identical to the input. An empty hole
    returns a plain copy; a hole covering every pixel raises FullMaskError
    because there is nothing to march from.
    """
    hole = request.hole
    count = int(np.count_nonzero(hole))
    if count == 0:
        return request.image.copy()
    if count == hole.size:
        raise FullMaskError("hole covers the whole image; no known pixels to fill from")
    return kernels.fmm_inpaint(request.image, hole, request.radius)
