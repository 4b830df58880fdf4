#!/usr/bin/env python3
"""Side-by-side timing of the jitted kernels and the plain numpy path.

The backend is fixed at import time by the RFAUG_PURE_NUMPY flag, so the
launcher spawns one fresh interpreter per backend and merges the reports.

    python3 benchmarks/bench_kernels.py
"""
import argparse
import json
import os
import subprocess
import sys
import time

CASES = ("dilate_7_128", "bilinear_96x128_to_64x96", "nearest_mask", "inpaint_128")


def _run_cases():
    import numpy as np

    from rfaug import kernels
    from rfaug.inpaint import InpaintRequest, inpaint
    from rfaug.maskops import dilate

    kernels.warmup()
    rng = np.random.default_rng(11)
    mask = (rng.random((128, 128)) < 0.2).astype(np.uint8)
    img = rng.integers(0, 256, size=(128, 96, 3), dtype=np.uint8)
    plate = rng.integers(0, 256, size=(128, 128, 3), dtype=np.uint8)
    hole = np.zeros((128, 128), dtype=np.uint8)
    hole[40:76, 50:78] = 1
    req = InpaintRequest(image=plate, hole=hole)

    jobs = {
        "dilate_7_128": lambda: dilate(mask, 7),
        "bilinear_96x128_to_64x96": lambda: kernels.resize_bilinear(
            img.astype(np.float64), 96, 64
        ),
        "nearest_mask": lambda: kernels.resize_nearest(mask, 96, 64),
        "inpaint_128": lambda: inpaint(req),
    }
    results = {}
    for name in CASES:
        fn = jobs[name]
        fn()  # shake out any lazy setup before timing
        best = float("inf")
        for _ in range(5):
            t0 = time.perf_counter()
            for _ in range(10):
                fn()
            best = min(best, (time.perf_counter() - t0) / 10)
        results[name] = best
    return {"backend": kernels.active_backend(), "results": results}


def _spawn(pure: bool):
    env = dict(os.environ)
    env["RFAUG_PURE_NUMPY"] = "1" if pure else "0"
    proc = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--inner"],
        capture_output=True, text=True, env=env, check=True,
    )
    return json.loads(proc.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.inner:
        json.dump(_run_cases(), sys.stdout)
        return

    fast = _spawn(pure=False)
    slow = _spawn(pure=True)
    left, right = fast["backend"], slow["backend"]
    print(f"{'case':<28} {left:>12} {right:>12} {'ratio':>8}")
    for name in CASES:
        a = fast["results"][name] * 1e6
        b = slow["results"][name] * 1e6
        ratio = b / a if a > 0 else float("inf")
        print(f"{name:<28} {a:>10.1f}us {b:>10.1f}us {ratio:>7.1f}x")


if __name__ == "__main__":
    main()
