"""Procedural test-card datasets.

Each card is a flat background with a few prop rectangles and a person-like
silhouette (head, torso, arms, legs) whose exact mask is known. Cards give
the test suite and the demos a dataset with controlled geometry: silhouette
sizes and shapes vary enough that the pairing gates see accepts and rejects
on both sides of their thresholds.

Everything derives from a counter-based stream per card, so a (seed, index)
pair always draws the same card.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np
from PIL import Image

VIEWPOINTS = ("front", "back", "side")
ATTRIBUTES = ("age", "bag")


def _card_stream(seed: int, index: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, index & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _disk(mask, cy, cx, r):
    h, w = mask.shape
    yy, xx = np.ogrid[:h, :w]
    mask[(yy - cy) ** 2 + (xx - cx) ** 2 <= r * r] = 1


def _rect(mask, y0, y1, x0, x1):
    h, w = mask.shape
    y0 = max(0, y0)
    x0 = max(0, x0)
    y1 = min(h, y1)
    x1 = min(w, x1)
    if y0 < y1 and x0 < x1:
        mask[y0:y1, x0:x1] = 1


def draw_card(
    width: int, height: int, rng: np.random.Generator, viewpoint: str = "front"
) -> tuple[np.ndarray, np.ndarray]:
    """Render one card; returns (uint8 RGB image, uint8 {0,1} mask)."""
    mask = np.zeros((height, width), dtype=np.uint8)

    person_h = int(height * rng.uniform(0.52, 0.92))
    foot_y = height - max(1, int(height * 0.04))
    top_y = foot_y - person_h
    cx = width // 2 + int(rng.integers(-width // 12, width // 12 + 1))

    head_r = max(2, int(person_h * rng.uniform(0.09, 0.13)))
    torso_half = max(2, int(person_h * rng.uniform(0.16, 0.40)))
    if viewpoint == "side":
        torso_half = max(2, int(torso_half * 0.6))
    torso_top = top_y + 2 * head_r
    torso_bot = top_y + int(person_h * rng.uniform(0.50, 0.60))

    _disk(mask, top_y + head_r, cx, head_r)
    _rect(mask, torso_top, torso_bot, cx - torso_half, cx + torso_half + 1)

    leg_w = max(1, int(torso_half * rng.uniform(0.30, 0.45)))
    gap = int(torso_half * rng.uniform(0.0, 0.35))
    _rect(mask, torso_bot, foot_y, cx - gap - leg_w, cx - gap + 1)
    _rect(mask, torso_bot, foot_y, cx + gap, cx + gap + leg_w + 1)

    if rng.random() < 0.7:
        arm_w = max(1, head_r // 2)
        arm_bot = torso_top + int((torso_bot - torso_top) * 0.85)
        _rect(mask, torso_top, arm_bot, cx - torso_half - arm_w, cx - torso_half)
        _rect(mask, torso_top, arm_bot, cx + torso_half + 1, cx + torso_half + 1 + arm_w)

    image = np.empty((height, width, 3), dtype=np.uint8)
    wall = rng.integers(60, 220, size=3)
    floor = rng.integers(40, 200, size=3)
    floor_y = foot_y - int(person_h * 0.05)
    image[:floor_y] = wall
    image[floor_y:] = floor
    for _ in range(int(rng.integers(1, 4))):
        ph = int(rng.integers(height // 10, height // 3))
        pw = int(rng.integers(width // 10, width // 3))
        py = int(rng.integers(0, height - ph))
        px = int(rng.integers(0, width - pw))
        image[py : py + ph, px : px + pw] = rng.integers(30, 230, size=3)

    shirt = rng.integers(30, 230, size=3)
    pants = rng.integers(30, 230, size=3)
    skin = np.array([205, 170, 140], dtype=np.uint8) + rng.integers(-20, 20, size=3)
    person = mask != 0
    rows = np.arange(height)[:, None]
    image[person & (rows < torso_top)] = np.clip(skin, 0, 255).astype(np.uint8)
    image[person & (rows >= torso_top) & (rows < torso_bot)] = shirt
    image[person & (rows >= torso_bot)] = pants
    return image, mask


def write_testcards(
    root: str | Path,
    count: int = 20,
    size: tuple[int, int] = (96, 128),
    seed: int = 7,
) -> Path:
    """Write a card dataset under root and return root.

    Cards land in img/ and msk/ with a meta.jsonl alongside. Labels are
    unique per card; viewpoints cycle through the vocabulary; the age
    attribute tracks silhouette height and bag is an independent coin.
    """
    root = Path(root)
    width, height = size
    (root / "img").mkdir(parents=True, exist_ok=True)
    (root / "msk").mkdir(parents=True, exist_ok=True)
    rows = []
    for i in range(count):
        rng = _card_stream(seed, i)
        viewpoint = VIEWPOINTS[i % len(VIEWPOINTS)]
        image, mask = draw_card(width, height, rng, viewpoint)
        label = f"p{i:03d}"
        sample_id = f"{label}_c1"
        img_rel = f"img/{sample_id}.png"
        msk_rel = f"msk/{sample_id}.png"
        Image.fromarray(image).save(root / img_rel)
        Image.fromarray(mask * 255).save(root / msk_rel)
        person_frac = int(np.count_nonzero(mask)) / mask.size
        rows.append(
            {
                "sample_id": sample_id,
                "image": img_rel,
                "mask": msk_rel,
                "label": label,
                "viewpoint": viewpoint,
                "attributes": {
                    "age": "adult" if person_frac > 0.10 else "child",
                    "bag": "yes" if rng.random() < 0.5 else "no",
                },
            }
        )
    with open(root / "meta.jsonl", "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"viewpoints": list(VIEWPOINTS), "attributes": list(ATTRIBUTES)}) + "\n")
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return root


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="write a procedural test-card dataset")
    parser.add_argument("out", help="directory to create the dataset in")
    parser.add_argument("--count", type=int, default=20)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--width", type=int, default=96)
    parser.add_argument("--height", type=int, default=128)
    args = parser.parse_args(argv)
    root = write_testcards(args.out, args.count, (args.width, args.height), args.seed)
    print(json.dumps({"root": str(root), "count": args.count}))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
