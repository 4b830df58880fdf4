"""Shared fixtures-adjacent utilities: dataset builders and reference
implementations (oracles) written independently of the package internals.

The oracles use plain Python loops and their own arithmetic on purpose;
they exist so package results can be checked against a second, simpler
derivation of the same contract.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image


def rect_mask(h: int, w: int, y0: int, y1: int, x0: int, x1: int) -> np.ndarray:
    """Mask with a filled rectangle, corners inclusive."""
    m = np.zeros((h, w), dtype=np.uint8)
    m[y0 : y1 + 1, x0 : x1 + 1] = 1
    return m


def build_dataset(
    root: Path,
    samples: list[dict],
    viewpoints=("front", "back", "side"),
    attributes=(),
) -> Path:
    """Write a dataset directory from in-memory sample dicts.

    Each sample dict needs sample_id, label, viewpoint, mask (ndarray) and
    may carry image (ndarray), attributes (dict). Missing images become
    flat grey cards with the silhouette tinted.
    """
    root = Path(root)
    (root / "img").mkdir(parents=True, exist_ok=True)
    (root / "msk").mkdir(parents=True, exist_ok=True)
    rows = []
    for s in samples:
        mask = np.asarray(s["mask"], dtype=np.uint8)
        h, w = mask.shape
        image = s.get("image")
        if image is None:
            image = np.full((h, w, 3), 110, dtype=np.uint8)
            image[mask != 0] = (200, 60, 60)
        sid = s["sample_id"]
        img_rel = f"img/{sid}.png"
        msk_rel = f"msk/{sid}.png"
        Image.fromarray(np.asarray(image, dtype=np.uint8)).save(root / img_rel)
        Image.fromarray(mask * 255).save(root / msk_rel)
        rows.append(
            {
                "sample_id": sid,
                "image": img_rel,
                "mask": msk_rel,
                "label": s.get("label", sid.split("_")[0]),
                "viewpoint": s.get("viewpoint", viewpoints[0]),
                "attributes": s.get("attributes", {}),
            }
        )
    with open(root / "meta.jsonl", "w", encoding="utf-8") as fh:
        fh.write(
            json.dumps({"viewpoints": list(viewpoints), "attributes": list(attributes)}) + "\n"
        )
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return root


# ---------------------------------------------------------------------------
# oracles


def oracle_dilate(mask: np.ndarray, size: int) -> np.ndarray:
    """Minkowski sum with an all-ones size x size square, by definition:
    output bit (i, j) is set iff any input bit lies within the window."""
    h, w = mask.shape
    r = (size - 1) // 2
    out = np.zeros_like(mask)
    for i in range(h):
        for j in range(w):
            hit = 0
            for di in range(-r, r + 1):
                for dj in range(-r, r + 1):
                    ii = i + di
                    jj = j + dj
                    if 0 <= ii < h and 0 <= jj < w and mask[ii, jj]:
                        hit = 1
            out[i, j] = hit
    return out


def oracle_iou(a: np.ndarray, b: np.ndarray) -> float:
    inter = 0
    union = 0
    h, w = a.shape
    for i in range(h):
        for j in range(w):
            p = a[i, j] != 0
            q = b[i, j] != 0
            if p and q:
                inter += 1
            if p or q:
                union += 1
    if union == 0:
        return 0.0
    return inter / union


def oracle_size_ratio(area_a: int, area_b: int) -> float:
    return min(area_a, area_b) / max(area_a, area_b)


def oracle_resize_nearest(src: np.ndarray, oh: int, ow: int) -> np.ndarray:
    """Nearest-neighbour resample: src index floor((dst + 0.5) * scale)."""
    sh, sw = src.shape
    out = np.zeros((oh, ow), dtype=src.dtype)
    for y in range(oh):
        sy = int((y + 0.5) * (sh / oh))
        sy = min(sy, sh - 1)
        for x in range(ow):
            sx = int((x + 0.5) * (sw / ow))
            sx = min(sx, sw - 1)
            out[y, x] = src[sy, sx]
    return out


def oracle_resize_bilinear_u8(src: np.ndarray, oh: int, ow: int) -> np.ndarray:
    """Align-centers bilinear resample of a uint8 image, rounded half up."""
    sh, sw = src.shape[:2]
    out = np.zeros((oh, ow, src.shape[2]), dtype=np.uint8)
    for y in range(oh):
        sy = (y + 0.5) * (sh / oh) - 0.5
        sy = min(max(sy, 0.0), sh - 1.0)
        y0 = int(sy)
        fy = sy - y0
        y1 = min(y0 + 1, sh - 1)
        for x in range(ow):
            sx = (x + 0.5) * (sw / ow) - 0.5
            sx = min(max(sx, 0.0), sw - 1.0)
            x0 = int(sx)
            fx = sx - x0
            x1 = min(x0 + 1, sw - 1)
            for c in range(src.shape[2]):
                a = float(src[y0, x0, c])
                b = float(src[y0, x1, c])
                cc = float(src[y1, x0, c])
                d = float(src[y1, x1, c])
                v = (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * cc + fx * d)
                out[y, x, c] = min(255, max(0, int(np.floor(v + 0.5))))
    return out


def oracle_letterbox_geometry(cw: int, ch: int, tw: int, th: int):
    """Scaled size and centred offset for an aspect-preserving fit."""
    scale = min(tw / cw, th / ch)
    sw = min(tw, max(1, int(cw * scale + 0.5)))
    sh = min(th, max(1, int(ch * scale + 0.5)))
    return sw, sh, (tw - sw) // 2, (th - sh) // 2


def oracle_silhouette(mask: np.ndarray, canvas: int = 128) -> np.ndarray:
    """Bbox-crop then aspect-preserving nearest fit onto a square canvas."""
    ys, xs = np.nonzero(mask)
    crop = mask[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1]
    ch, cw = crop.shape
    sw, sh, ox, oy = oracle_letterbox_geometry(cw, ch, canvas, canvas)
    scaled = oracle_resize_nearest(crop, sh, sw)
    out = np.zeros((canvas, canvas), dtype=np.uint8)
    out[oy : oy + sh, ox : ox + sw] = (scaled > 0).astype(np.uint8)
    return out


def load_png_gray(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("L"))


def random_mask(rng: np.random.Generator, h: int, w: int, density: float = 0.3) -> np.ndarray:
    return (rng.random((h, w)) < density).astype(np.uint8)


def nonempty_random_mask(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    while True:
        m = random_mask(rng, h, w, float(rng.uniform(0.1, 0.7)))
        if m.any():
            return m
