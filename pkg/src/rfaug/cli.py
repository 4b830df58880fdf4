"""Command-line front end.

Four modes, all emitting one JSON object on stdout:

* validate  scan a dataset and report problems;
* generate  render every accepted pair to PNG files plus a manifest;
* preview   render a small random selection into one contact-sheet image;
* stats     summarize pairing behaviour, optionally dumping one on-the-fly
            augmentation result for a given (epoch, index).

Settings resolve in precedence order: built-in defaults, then the
RFAUG_WORKERS environment variable (worker count only), then a JSON config
file given with --config, then explicit flags. Exit codes: 0 on success,
1 when the data fails validation, 2 for usage or I/O problems.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
from PIL import Image

from . import kernels
from .compositor import compose
from .errors import AugmentationError, MissingFileError
from .inpaint import DEFAULT_RADIUS
from .manifest import ManifestRecord, stable_digest, write_manifest
from .maskops import crop_resize_preserve_aspect, mask_bbox, replicate_pad_to_square
from .model import load_dataset, validate_dataset
from .pairing import (
    CompositeRecipe,
    PairingConfig,
    PairingCounters,
    PairScratch,
    candidate_pairs,
)
from .sampler import AugmentationPolicy, augment, partner_lists

DEFAULT_WORKERS = 4
WORKERS_ENV = "RFAUG_WORKERS"
THUMB_SIDE = 128


class UsageError(Exception):
    """Bad flags, bad config file, or unusable option values."""


@dataclass
class RunConfig:
    """Effective settings for one invocation."""

    root: str = ""
    out: str = "rfaug_out"
    ts: float = 0.8
    ti: float = 0.7
    size_rule: str = "as_written"
    shape_rule: str = "as_written"
    roi: str = "full_body"
    split_fraction: float = 0.5
    probability: float = 0.3
    seed: int = 0
    workers: int = DEFAULT_WORKERS
    match_attr: tuple[str, ...] = ()
    same_viewpoint: bool = True
    manifest: str = ""

    def pairing(self) -> PairingConfig:
        try:
            return PairingConfig(
                t_s=self.ts,
                t_i=self.ti,
                size_rule=self.size_rule,
                shape_rule=self.shape_rule,
                require_same_viewpoint=self.same_viewpoint,
                match_attributes=self.match_attr,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def policy(self) -> AugmentationPolicy:
        try:
            return AugmentationPolicy(
                probability=self.probability, seed=self.seed, roi_mode=self.roi
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def manifest_path(self) -> Path:
        if self.manifest:
            return Path(self.manifest)
        return Path(self.out) / "manifest.jsonl"

    def effective(self) -> dict:
        """The semantic settings that shape output pixels and labels.

        Execution details (paths, worker count) stay out so reruns of the
        same recipe hash identically.
        """
        return {
            "ts": self.ts,
            "ti": self.ti,
            "size_rule": self.size_rule,
            "shape_rule": self.shape_rule,
            "roi": self.roi,
            "split_fraction": self.split_fraction,
            "probability": self.probability,
            "seed": self.seed,
            "match_attr": list(self.match_attr),
            "same_viewpoint": self.same_viewpoint,
            "inpaint_radius": DEFAULT_RADIUS,
        }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfaug",
        description="swap segmented foregrounds onto repaired backgrounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def shared(p):
        p.add_argument("--root", help="dataset directory holding meta.jsonl")
        p.add_argument("--config", help="JSON file with the same keys as the flags")
        p.add_argument("--out", help="output directory (default rfaug_out)")
        p.add_argument("--ts", type=float, help="size-ratio threshold")
        p.add_argument("--ti", type=float, help="shape-overlap threshold")
        p.add_argument("--size-rule", choices=["as-written", "similarity"], dest="size_rule")
        p.add_argument("--shape-rule", choices=["as-written", "similarity"], dest="shape_rule")
        p.add_argument("--roi", choices=["full-body", "upper-body"])
        p.add_argument("--split-fraction", type=float, dest="split_fraction")
        p.add_argument("--probability", type=float, help="per-sample swap probability")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument(
            "--match-attr",
            action="append",
            dest="match_attr",
            metavar="NAME",
            help="attribute that must match across a pair; repeatable",
        )
        p.add_argument("--same-viewpoint", choices=["on", "off"], dest="same_viewpoint")
        p.add_argument("--manifest", metavar="PATH", help="manifest location")

    shared(sub.add_parser("validate", help="check a dataset and report problems"))
    shared(sub.add_parser("generate", help="render every accepted pair"))
    p_prev = sub.add_parser("preview", help="render a sample grid")
    shared(p_prev)
    p_prev.add_argument("--count", type=int, default=4, help="rows in the grid")
    p_stats = sub.add_parser("stats", help="summarize pairing on a dataset")
    shared(p_stats)
    p_stats.add_argument(
        "--dump-augment",
        nargs=2,
        type=int,
        metavar=("EPOCH", "INDEX"),
        dest="dump_augment",
        help="also run one on-the-fly augmentation and save its image",
    )
    return parser


_RULE_VALUES = {"as-written": "as_written", "as_written": "as_written", "similarity": "similarity"}
_ROI_VALUES = {"full-body": "full_body", "full_body": "full_body", "upper-body": "upper_body", "upper_body": "upper_body"}


def _coerce(name: str, value):
    if name in ("size_rule", "shape_rule"):
        if value not in _RULE_VALUES:
            raise UsageError(f"{name} must be as-written or similarity, got {value!r}")
        return _RULE_VALUES[value]
    if name == "roi":
        if value not in _ROI_VALUES:
            raise UsageError(f"roi must be full-body or upper-body, got {value!r}")
        return _ROI_VALUES[value]
    if name == "same_viewpoint":
        if isinstance(value, bool):
            return value
        if value in ("on", "off"):
            return value == "on"
        raise UsageError(f"same_viewpoint must be on or off, got {value!r}")
    if name == "match_attr":
        if isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value):
            return tuple(value)
        raise UsageError("match_attr must be a list of attribute names")
    if name in ("ts", "ti", "split_fraction", "probability"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise UsageError(f"{name} must be a number, got {value!r}")
        return float(value)
    if name in ("seed", "workers"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise UsageError(f"{name} must be an integer, got {value!r}")
        return int(value)
    if name in ("root", "out", "manifest"):
        if not isinstance(value, str):
            raise UsageError(f"{name} must be a string, got {value!r}")
        return value
    raise UsageError(f"unknown config key {name!r}")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}

    env_workers = os.environ.get(WORKERS_ENV)
    if env_workers is not None and env_workers.strip():
        try:
            cfg.workers = int(env_workers)
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer, got {env_workers!r}") from None

    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except FileNotFoundError:
            raise UsageError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in file_cfg.items():
            name = key.replace("-", "_")
            if name not in known:
                raise UsageError(f"unknown config key {key!r}")
            setattr(cfg, name, _coerce(name, value))

    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is None:
            continue
        setattr(cfg, f.name, _coerce(f.name, value))

    if not cfg.root:
        raise UsageError("--root is required (flag or config file)")
    if cfg.workers < 1:
        raise UsageError(f"workers must be >= 1, got {cfg.workers}")
    if not 0.0 < cfg.split_fraction < 1.0:
        raise UsageError(f"split-fraction must lie strictly inside (0, 1), got {cfg.split_fraction}")
    cfg.pairing()
    cfg.policy()
    return cfg


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _validation_gate(cfg: RunConfig, mode: str) -> list[dict]:
    problems = validate_dataset(cfg.root)
    if problems:
        _emit({"mode": mode, "ok": False, "root": cfg.root, "problems": problems})
    return problems


def cmd_validate(cfg: RunConfig, args: argparse.Namespace) -> int:
    problems = validate_dataset(cfg.root)
    _emit(
        {
            "mode": "validate",
            "ok": not problems,
            "root": cfg.root,
            "problems": problems,
        }
    )
    return 0 if not problems else 1


def _composite_name(recipe: CompositeRecipe) -> str:
    return f"{recipe.roi_source}__in__{recipe.bg_source}__{recipe.roi_mode}.png"


def cmd_generate(cfg: RunConfig, args: argparse.Namespace) -> int:
    if _validation_gate(cfg, "generate"):
        return 1
    index = load_dataset(cfg.root)
    pairing = cfg.pairing()
    counters = PairingCounters()
    scratch = PairScratch()
    recipes = list(candidate_pairs(index, pairing, cfg.roi, counters, scratch))
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = cfg.manifest_path()
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    config_hash = stable_digest(cfg.effective())
    kernels.warmup()

    def render(recipe: CompositeRecipe) -> ManifestRecord:
        synth = compose(
            recipe,
            index,
            pairing,
            split_fraction=cfg.split_fraction,
            scratch=scratch,
            enforce_constraints=False,
        )
        name = _composite_name(recipe)
        Image.fromarray(np.asarray(synth.image)).save(out_dir / name)
        donor = index.record(recipe.roi_source)
        bg = index.record(recipe.bg_source)
        return ManifestRecord(
            synthetic_path=name,
            roi_source=recipe.roi_source,
            bg_source=recipe.bg_source,
            label=synth.label,
            roi_mode=recipe.roi_mode,
            viewpoint=donor.viewpoint,
            config_hash=config_hash,
            native_size=bg.native_size,
        )

    started = time.perf_counter()
    results: list[ManifestRecord] = []
    done = False
    try:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(render, recipe) for recipe in recipes]
            try:
                for future in futures:
                    results.append(future.result())
            except BaseException:
                pool.shutdown(wait=False, cancel_futures=True)
                raise
        write_manifest(results, manifest_path)
        done = True
    finally:
        if not done:
            for recipe in recipes:
                (out_dir / _composite_name(recipe)).unlink(missing_ok=True)
            manifest_path.unlink(missing_ok=True)
    elapsed = time.perf_counter() - started
    _emit(
        {
            "mode": "generate",
            "ok": True,
            "root": cfg.root,
            "out": str(out_dir),
            "manifest": str(manifest_path),
            "config_hash": config_hash,
            "records": len(index),
            "considered": counters.considered,
            "accepted": counters.accepted,
            "rejected": counters.rejected,
            "written": len(results),
            "elapsed_s": round(elapsed, 3),
            "per_second": round(len(results) / elapsed, 1) if elapsed > 0 else 0.0,
            "workers": cfg.workers,
            "backend": kernels.active_backend(),
        }
    )
    return 0


def _thumb(image: np.ndarray) -> np.ndarray:
    h, w = image.shape[:2]
    box = mask_bbox(np.ones((h, w), dtype=np.uint8))
    return crop_resize_preserve_aspect(image, box, (THUMB_SIDE, THUMB_SIDE))


def cmd_preview(cfg: RunConfig, args: argparse.Namespace) -> int:
    if args.count <= 0:
        raise UsageError(f"--count must be positive, got {args.count}")
    if _validation_gate(cfg, "preview"):
        return 1
    index = load_dataset(cfg.root)
    pairing = cfg.pairing()
    scratch = PairScratch()
    recipes = list(candidate_pairs(index, pairing, cfg.roi, scratch=scratch))
    if not recipes:
        _emit(
            {
                "mode": "preview",
                "ok": False,
                "root": cfg.root,
                "detail": "no pair satisfies the active constraints",
            }
        )
        return 1
    rng = np.random.default_rng(cfg.seed)
    picks = [recipes[int(k)] for k in rng.integers(0, len(recipes), size=args.count)]
    kernels.warmup()

    gap = 2
    rows = []
    for recipe in picks:
        donor = index.record(recipe.roi_source)
        bg = index.record(recipe.bg_source)
        synth = compose(
            recipe,
            index,
            pairing,
            split_fraction=cfg.split_fraction,
            scratch=scratch,
            enforce_constraints=False,
        )
        donor_plate, _ = replicate_pad_to_square(donor.load_image(), donor.load_mask())
        bg_plate, _ = replicate_pad_to_square(bg.load_image(), bg.load_mask())
        tiles = [_thumb(donor_plate), _thumb(bg_plate), _thumb(np.asarray(synth.image))]
        strip = np.full(
            (THUMB_SIDE, 3 * THUMB_SIDE + 2 * gap, 3), 255, dtype=np.uint8
        )
        for t, tile in enumerate(tiles):
            x = t * (THUMB_SIDE + gap)
            strip[:, x : x + THUMB_SIDE] = tile
        rows.append(strip)
    height = args.count * THUMB_SIDE + (args.count - 1) * gap
    sheet = np.full((height, rows[0].shape[1], 3), 255, dtype=np.uint8)
    for r, strip in enumerate(rows):
        y = r * (THUMB_SIDE + gap)
        sheet[y : y + THUMB_SIDE] = strip
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "preview.png"
    Image.fromarray(sheet).save(path)
    _emit(
        {
            "mode": "preview",
            "ok": True,
            "root": cfg.root,
            "path": str(path),
            "rows": args.count,
            "columns": 3,
        }
    )
    return 0


def cmd_stats(cfg: RunConfig, args: argparse.Namespace) -> int:
    if _validation_gate(cfg, "stats"):
        return 1
    index = load_dataset(cfg.root)
    pairing = cfg.pairing()
    counters = PairingCounters()
    scratch = PairScratch()
    for _ in candidate_pairs(index, pairing, cfg.roi, counters, scratch):
        pass
    table = partner_lists(index, pairing, scratch)
    sizes = [len(v) for v in table.values()]
    payload = {
        "mode": "stats",
        "ok": True,
        "root": cfg.root,
        "records": len(index),
        "labeled": sum(1 for rec in index if rec.label),
        "viewpoints": list(index.viewpoints),
        "attributes": list(index.attribute_names),
        "considered": counters.considered,
        "accepted": counters.accepted,
        "rejected": counters.rejected,
        "partners": {
            "min": min(sizes) if sizes else 0,
            "max": max(sizes) if sizes else 0,
            "mean": round(sum(sizes) / len(sizes), 2) if sizes else 0.0,
        },
        "backend": kernels.active_backend(),
    }
    if args.dump_augment is not None:
        epoch, sample_index = args.dump_augment
        if epoch < 0 or not 0 <= sample_index < len(index):
            raise UsageError(
                f"--dump-augment wants a non-negative epoch and an index in [0, {len(index)})"
            )
        kernels.warmup()
        outcome = augment(
            index,
            sample_index,
            epoch,
            cfg.policy(),
            pairing,
            partners=table,
            split_fraction=cfg.split_fraction,
            scratch=scratch,
        )
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"augment_e{epoch}_i{sample_index}.png"
        Image.fromarray(np.asarray(outcome.image)).save(path)
        dump = {
            "path": str(path),
            "sample_id": outcome.record.sample_id,
            "label": outcome.label,
            "augmented": outcome.augmented,
        }
        if outcome.synthetic is not None:
            dump["bg_source"] = outcome.synthetic.recipe.bg_source
        payload["dump"] = dump
    _emit(payload)
    return 0


_COMMANDS = {
    "validate": cmd_validate,
    "generate": cmd_generate,
    "preview": cmd_preview,
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        return _COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        _emit({"ok": False, "error": "usage", "detail": str(exc)})
        return 2
    except MissingFileError as exc:
        _emit({"ok": False, "error": "missing_file", "detail": str(exc)})
        return 2
    except AugmentationError as exc:
        _emit({"ok": False, "error": type(exc).__name__, "detail": str(exc)})
        return 1
    except OSError as exc:
        _emit({"ok": False, "error": "io", "detail": str(exc)})
        return 2
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    raise SystemExit(main())
