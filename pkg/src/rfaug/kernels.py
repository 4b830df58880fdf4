"""Hot pixel loops with a numba fast path and a pure-numpy fallback.

The jitted path is the default whenever numba imports cleanly. Setting the
environment variable RFAUG_PURE_NUMPY to 1/true/yes/on before import forces
the fallback, which is useful for debugging and for hosts where numba is
unavailable. Both paths are written to produce bit-identical output: the
bilinear kernel evaluates the exact same floating-point expression per
element in both variants, and the fast-marching fill is one function that
either runs under the JIT or as plain Python.

benchmarks/bench_kernels.py times the two paths against each other.
"""
from __future__ import annotations

import math
import os

import numpy as np

# fast-marching pixel states
KNOWN = 0
BAND = 1
INSIDE = 2
BLOCKED = 3

_FAR = 1.0e6


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in {"1", "true", "yes", "on"}


PURE_NUMPY = _env_flag("RFAUG_PURE_NUMPY")

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not PURE_NUMPY


def active_backend() -> str:
    """Name of the path the dispatchers below will take."""
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# square dilation

def _dilate_loops(bits, radius, out):
    h, w = bits.shape
    for i in range(h):
        for j in range(w):
            hit = 0
            for ii in range(max(0, i - radius), min(h, i + radius + 1)):
                for jj in range(max(0, j - radius), min(w, j + radius + 1)):
                    if bits[ii, jj] != 0:
                        hit = 1
                        break
                if hit == 1:
                    break
            out[i, j] = hit


def _dilate_vec(bits, radius):
    # a square window separates into a horizontal and a vertical OR sweep
    h, w = bits.shape
    rows = np.zeros((h, w), dtype=np.uint8)
    for d in range(-radius, radius + 1):
        if d < 0:
            rows[:, : w + d] |= bits[:, -d:]
        elif d > 0:
            rows[:, d:] |= bits[:, : w - d]
        else:
            rows |= bits
    out = np.zeros((h, w), dtype=np.uint8)
    for d in range(-radius, radius + 1):
        if d < 0:
            out[: h + d, :] |= rows[-d:, :]
        elif d > 0:
            out[d:, :] |= rows[: h - d, :]
        else:
            out |= rows
    return out


def dilate_bits(bits: np.ndarray, radius: int) -> np.ndarray:
    """Binary dilation of a {0,1} uint8 mask by a (2*radius+1) square window.

    Pixels outside the raster count as zero.
    """
    if radius == 0:
        return bits.copy()
    if USE_NUMBA:
        out = np.empty_like(bits)
        _dilate_loops(bits, radius, out)
        return out
    return _dilate_vec(bits, radius)


# ---------------------------------------------------------------------------
# resampling
#
# Source coordinates follow the align-centers convention
#   src = (dst + 0.5) * (src_size / dst_size) - 0.5
# clamped to the valid range. Bilinear output stays float64 here; callers
# round once at the end of their pipeline.

def _resize_bilinear_loops(src, out):
    sh = src.shape[0]
    sw = src.shape[1]
    oh = out.shape[0]
    ow = out.shape[1]
    scale_y = sh / oh
    scale_x = sw / ow
    for y in range(oh):
        sy = (y + 0.5) * scale_y - 0.5
        if sy < 0.0:
            sy = 0.0
        if sy > sh - 1.0:
            sy = sh - 1.0
        y0 = int(sy)
        fy = sy - y0
        y1 = y0 + 1
        if y1 > sh - 1:
            y1 = sh - 1
        for x in range(ow):
            sx = (x + 0.5) * scale_x - 0.5
            if sx < 0.0:
                sx = 0.0
            if sx > sw - 1.0:
                sx = sw - 1.0
            x0 = int(sx)
            fx = sx - x0
            x1 = x0 + 1
            if x1 > sw - 1:
                x1 = sw - 1
            for c in range(src.shape[2]):
                a = src[y0, x0, c]
                b = src[y0, x1, c]
                cc = src[y1, x0, c]
                d = src[y1, x1, c]
                out[y, x, c] = (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * (
                    (1.0 - fx) * cc + fx * d
                )


def _resize_bilinear_vec(src, oh, ow):
    sh = src.shape[0]
    sw = src.shape[1]
    scale_y = sh / oh
    scale_x = sw / ow
    sy = (np.arange(oh, dtype=np.float64) + 0.5) * scale_y - 0.5
    np.clip(sy, 0.0, sh - 1.0, out=sy)
    sx = (np.arange(ow, dtype=np.float64) + 0.5) * scale_x - 0.5
    np.clip(sx, 0.0, sw - 1.0, out=sx)
    y0 = sy.astype(np.int64)
    x0 = sx.astype(np.int64)
    fy = (sy - y0)[:, None, None]
    fx = (sx - x0)[None, :, None]
    y1 = np.minimum(y0 + 1, sh - 1)
    x1 = np.minimum(x0 + 1, sw - 1)
    a = src[y0[:, None], x0[None, :], :]
    b = src[y0[:, None], x1[None, :], :]
    cc = src[y1[:, None], x0[None, :], :]
    d = src[y1[:, None], x1[None, :], :]
    # the grouping must match the loop variant exactly for bit parity
    return (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * cc + fx * d)


def resize_bilinear(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample of an (H, W, C) float64 array; returns float64."""
    if src.shape[0] == out_h and src.shape[1] == out_w:
        return src.copy()
    if USE_NUMBA:
        out = np.empty((out_h, out_w, src.shape[2]), dtype=np.float64)
        _resize_bilinear_loops(src, out)
        return out
    return _resize_bilinear_vec(src, out_h, out_w)


def _resize_nearest_loops(src, out):
    sh = src.shape[0]
    sw = src.shape[1]
    oh = out.shape[0]
    ow = out.shape[1]
    scale_y = sh / oh
    scale_x = sw / ow
    for y in range(oh):
        sy = int((y + 0.5) * scale_y)
        if sy > sh - 1:
            sy = sh - 1
        for x in range(ow):
            sx = int((x + 0.5) * scale_x)
            if sx > sw - 1:
                sx = sw - 1
            out[y, x] = src[sy, sx]


def _resize_nearest_vec(src, oh, ow):
    sh = src.shape[0]
    sw = src.shape[1]
    sy = (np.arange(oh, dtype=np.float64) + 0.5) * (sh / oh)
    sx = (np.arange(ow, dtype=np.float64) + 0.5) * (sw / ow)
    iy = np.minimum(sy.astype(np.int64), sh - 1)
    ix = np.minimum(sx.astype(np.int64), sw - 1)
    return src[iy[:, None], ix[None, :]]


def resize_nearest(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Nearest-neighbour resample of an (H, W) array, dtype preserved."""
    if src.shape[0] == out_h and src.shape[1] == out_w:
        return src.copy()
    if USE_NUMBA:
        out = np.empty((out_h, out_w), dtype=src.dtype)
        _resize_nearest_loops(src, out)
        return out
    return _resize_nearest_vec(src, out_h, out_w)


def round_to_u8(values: np.ndarray) -> np.ndarray:
    """Round half up and clamp to the uint8 range."""
    out = np.floor(values + 0.5)
    np.clip(out, 0.0, 255.0, out=out)
    return out.astype(np.uint8)


# ---------------------------------------------------------------------------
# fast-marching inpainting
#
# The march keeps a binary min-heap over (arrival time, pixel index) pairs in
# two flat arrays; ties on time break on the row-major pixel index so the pop
# order, and with it every fill, is fully deterministic.

def _heap_push(ht, hi, n, t, idx):
    ht[n] = t
    hi[n] = idx
    k = n
    while k > 0:
        p = (k - 1) >> 1
        if ht[p] > ht[k] or (ht[p] == ht[k] and hi[p] > hi[k]):
            tv = ht[p]
            ht[p] = ht[k]
            ht[k] = tv
            iv = hi[p]
            hi[p] = hi[k]
            hi[k] = iv
            k = p
        else:
            break
    return n + 1


def _heap_pop(ht, hi, n):
    t = ht[0]
    idx = hi[0]
    n -= 1
    ht[0] = ht[n]
    hi[0] = hi[n]
    k = 0
    while True:
        left = 2 * k + 1
        right = left + 1
        small = k
        if left < n and (
            ht[left] < ht[small] or (ht[left] == ht[small] and hi[left] < hi[small])
        ):
            small = left
        if right < n and (
            ht[right] < ht[small] or (ht[right] == ht[small] and hi[right] < hi[small])
        ):
            small = right
        if small == k:
            break
        tv = ht[small]
        ht[small] = ht[k]
        ht[k] = tv
        iv = hi[small]
        hi[small] = hi[k]
        hi[k] = iv
        k = small
    return t, idx, n


def _solve_step(dist, flags, h, w, i1, j1, i2, j2):
    # closed-form eikonal update from one quadrant pair of neighbours
    known1 = 0 <= i1 < h and 0 <= j1 < w and flags[i1, j1] == KNOWN
    known2 = 0 <= i2 < h and 0 <= j2 < w and flags[i2, j2] == KNOWN
    if known1 and known2:
        t1 = dist[i1, j1]
        t2 = dist[i2, j2]
        d = 2.0 - (t1 - t2) * (t1 - t2)
        if d > 0.0:
            r = math.sqrt(d)
            s = (t1 + t2 - r) * 0.5
            if s >= t1 and s >= t2:
                return s
            s += r
            if s >= t1 and s >= t2:
                return s
        return _FAR
    if known1:
        return 1.0 + dist[i1, j1]
    if known2:
        return 1.0 + dist[i2, j2]
    return _FAR


def _quadrant_min(dist, flags, h, w, i, j):
    t1 = _solve_step(dist, flags, h, w, i - 1, j, i, j - 1)
    t2 = _solve_step(dist, flags, h, w, i + 1, j, i, j - 1)
    t3 = _solve_step(dist, flags, h, w, i - 1, j, i, j + 1)
    t4 = _solve_step(dist, flags, h, w, i + 1, j, i, j + 1)
    m = t1
    if t2 < m:
        m = t2
    if t3 < m:
        m = t3
    if t4 < m:
        m = t4
    return m


def _fill_pixel(img, dist, flags, h, w, i, j, radius):
    # gradient of the arrival time at the pixel being filled
    gx = 0.0
    if j - 1 >= 0 and j + 1 < w and flags[i, j - 1] != INSIDE and flags[i, j + 1] != INSIDE:
        gx = (dist[i, j + 1] - dist[i, j - 1]) * 0.5
    elif j - 1 >= 0 and flags[i, j - 1] != INSIDE:
        gx = dist[i, j] - dist[i, j - 1]
    elif j + 1 < w and flags[i, j + 1] != INSIDE:
        gx = dist[i, j + 1] - dist[i, j]
    gy = 0.0
    if i - 1 >= 0 and i + 1 < h and flags[i - 1, j] != INSIDE and flags[i + 1, j] != INSIDE:
        gy = (dist[i + 1, j] - dist[i - 1, j]) * 0.5
    elif i - 1 >= 0 and flags[i - 1, j] != INSIDE:
        gy = dist[i, j] - dist[i - 1, j]
    elif i + 1 < h and flags[i + 1, j] != INSIDE:
        gy = dist[i + 1, j] - dist[i, j]

    r2 = float(radius * radius)
    acc0 = 0.0
    acc1 = 0.0
    acc2 = 0.0
    wsum = 0.0
    for ii in range(i - radius, i + radius + 1):
        if ii < 0 or ii >= h:
            continue
        for jj in range(j - radius, j + radius + 1):
            if jj < 0 or jj >= w:
                continue
            if flags[ii, jj] == INSIDE:
                continue
            di = float(i - ii)
            dj = float(j - jj)
            d2 = di * di + dj * dj
            if d2 > r2 or d2 == 0.0:
                continue
            # direction, geometric distance, and level-set proximity weights
            direction = abs(di * gy + dj * gx) / math.sqrt(d2)
            if direction == 0.0:
                direction = 1.0e-6
            dst = 1.0 / d2
            lev = 1.0 / (1.0 + abs(dist[ii, jj] - dist[i, j]))
            wgt = direction * dst * lev
            acc0 += wgt * img[ii, jj, 0]
            acc1 += wgt * img[ii, jj, 1]
            acc2 += wgt * img[ii, jj, 2]
            wsum += wgt
    if wsum > 0.0:
        img[i, j, 0] = acc0 / wsum
        img[i, j, 1] = acc1 / wsum
        img[i, j, 2] = acc2 / wsum


def _fmm_march(img, hole, radius):
    """Fill hole pixels of a float64 (H, W, 3) image in place.

    hole is a {0,1} uint8 mask with at least one zero pixel.
    """
    h, w = hole.shape
    n = h * w
    cap = 6 * n + 16
    flags = np.empty((h, w), dtype=np.uint8)
    dist = np.zeros((h, w), dtype=np.float64)
    ht = np.empty(cap, dtype=np.float64)
    hi = np.empty(cap, dtype=np.int64)
    hn = 0

    for i in range(h):
        for j in range(w):
            if hole[i, j] != 0:
                flags[i, j] = INSIDE
                dist[i, j] = _FAR
            else:
                flags[i, j] = KNOWN

    # the band is every known pixel 4-adjacent to the hole
    for i in range(h):
        for j in range(w):
            if flags[i, j] == INSIDE:
                continue
            adjacent = False
            if i > 0 and hole[i - 1, j] != 0:
                adjacent = True
            elif i + 1 < h and hole[i + 1, j] != 0:
                adjacent = True
            elif j > 0 and hole[i, j - 1] != 0:
                adjacent = True
            elif j + 1 < w and hole[i, j + 1] != 0:
                adjacent = True
            if adjacent:
                flags[i, j] = BAND
                dist[i, j] = 0.0
                hn = _heap_push(ht, hi, hn, 0.0, i * w + j)

    # First march outward from the band into the known region so the
    # level-set weight sees signed distances on both sides of the boundary.
    # Values are stored negated; the march stops past twice the fill radius.
    flags2 = np.empty((h, w), dtype=np.uint8)
    dist2 = np.full((h, w), _FAR, dtype=np.float64)
    ht2 = np.empty(cap, dtype=np.float64)
    hi2 = np.empty(cap, dtype=np.int64)
    hn2 = 0
    for i in range(h):
        for j in range(w):
            if flags[i, j] == BAND:
                flags2[i, j] = BAND
                dist2[i, j] = 0.0
                hn2 = _heap_push(ht2, hi2, hn2, 0.0, i * w + j)
            elif flags[i, j] == INSIDE:
                flags2[i, j] = BLOCKED
            else:
                flags2[i, j] = INSIDE
    cutoff = 2.0 * radius
    while hn2 > 0:
        t, idx, hn2 = _heap_pop(ht2, hi2, hn2)
        i = idx // w
        j = idx - i * w
        if flags2[i, j] != BAND:
            continue
        flags2[i, j] = KNOWN
        if t > cutoff:
            break
        for step in range(4):
            if step == 0:
                ii = i - 1
                jj = j
            elif step == 1:
                ii = i + 1
                jj = j
            elif step == 2:
                ii = i
                jj = j - 1
            else:
                ii = i
                jj = j + 1
            if ii < 0 or ii >= h or jj < 0 or jj >= w:
                continue
            f = flags2[ii, jj]
            if f != INSIDE and f != BAND:
                continue
            tn = _quadrant_min(dist2, flags2, h, w, ii, jj)
            if tn < dist2[ii, jj]:
                dist2[ii, jj] = tn
                flags2[ii, jj] = BAND
                hn2 = _heap_push(ht2, hi2, hn2, tn, ii * w + jj)
    for i in range(h):
        for j in range(w):
            if flags[i, j] == KNOWN and dist2[i, j] < _FAR:
                dist[i, j] = -dist2[i, j]

    # main march into the hole; each inside pixel is filled the moment it
    # joins the band
    while hn > 0:
        t, idx, hn = _heap_pop(ht, hi, hn)
        i = idx // w
        j = idx - i * w
        if flags[i, j] != BAND:
            continue
        flags[i, j] = KNOWN
        for step in range(4):
            if step == 0:
                ii = i - 1
                jj = j
            elif step == 1:
                ii = i + 1
                jj = j
            elif step == 2:
                ii = i
                jj = j - 1
            else:
                ii = i
                jj = j + 1
            if ii < 0 or ii >= h or jj < 0 or jj >= w:
                continue
            f = flags[ii, jj]
            if f != INSIDE and f != BAND:
                continue
            tn = _quadrant_min(dist, flags, h, w, ii, jj)
            if tn < dist[ii, jj]:
                dist[ii, jj] = tn
                if f == INSIDE:
                    _fill_pixel(img, dist, flags, h, w, ii, jj, radius)
                    flags[ii, jj] = BAND
                hn = _heap_push(ht, hi, hn, tn, ii * w + jj)


if USE_NUMBA:
    _jit = njit(cache=True, nogil=True)
    _dilate_loops = _jit(_dilate_loops)
    _resize_bilinear_loops = _jit(_resize_bilinear_loops)
    _resize_nearest_loops = _jit(_resize_nearest_loops)
    _heap_push = _jit(_heap_push)
    _heap_pop = _jit(_heap_pop)
    _solve_step = _jit(_solve_step)
    _quadrant_min = _jit(_quadrant_min)
    _fill_pixel = _jit(_fill_pixel)
    _fmm_march = _jit(_fmm_march)


def fmm_inpaint(image: np.ndarray, hole: np.ndarray, radius: int) -> np.ndarray:
    """Return a copy of a uint8 (H, W, 3) image with hole pixels filled.

    Pixels where hole == 0 are returned bit-identical to the input; this
    function performs no validation beyond what indexing enforces, callers
    go through the request wrapper for that.
    """
    work = image.astype(np.float64)
    _fmm_march(work, hole, radius)
    out = image.copy()
    sel = hole != 0
    out[sel] = round_to_u8(work[sel])
    return out


def warmup() -> None:
    """Compile the jitted kernels on a tiny input so later calls run hot."""
    img = np.zeros((8, 8, 3), dtype=np.uint8)
    hole = np.zeros((8, 8), dtype=np.uint8)
    hole[3:5, 3:5] = 1
    fmm_inpaint(img, hole, 2)
    dilate_bits(hole, 1)
    resize_bilinear(img.astype(np.float64), 4, 4)
    resize_nearest(hole, 4, 4)
