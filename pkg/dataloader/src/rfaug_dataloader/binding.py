"""Dataset handle for training loops.

open() indexes a dataset once, reads an optional JSON settings file, and
precomputes the partner table. augment() then serves one sample per call,
addressed purely by (index, epoch), so any worker layout or shuffling
scheme replays the identical stream. close() drops the resources.
"""
from __future__ import annotations

import builtins
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rfaug import (
    DEFAULT_SPLIT_FRACTION,
    AugmentationPolicy,
    DatasetIndex,
    PairingConfig,
    PairScratch,
    SamplerStats,
    load_dataset,
    partner_lists,
)
from rfaug import augment as _augment_one


class ClosedHandleError(RuntimeError):
    """Use of a handle after close()."""


class IndexOutOfRangeError(IndexError):
    def __init__(self, index: int, size: int):
        super().__init__(f"sample index {index} outside dataset of size {size}")
        self.index = index
        self.size = size


# JSON keys understood in a settings file. Names match the batch CLI so the
# same file can drive both; purely operational keys are accepted and ignored.
_OPERATIONAL = frozenset({"root", "out", "workers", "manifest"})
_RULES = ("as_written", "similarity")
_ROI_MODES = ("full_body", "upper_body")


def _norm_token(value, allowed, key):
    if not isinstance(value, str):
        raise ValueError(f"config key {key!r} expects a string")
    token = value.replace("-", "_")
    if token not in allowed:
        raise ValueError(f"config key {key!r}: {value!r} not one of {allowed}")
    return token


def _norm_flag(value, key):
    if isinstance(value, bool):
        return value
    if value in ("on", "off"):
        return value == "on"
    raise ValueError(f"config key {key!r} expects true/false or 'on'/'off'")


def _read_settings(config_path):
    settings = {
        "ts": 0.8,
        "ti": 0.7,
        "size_rule": "as_written",
        "shape_rule": "as_written",
        "roi": "full_body",
        "split_fraction": DEFAULT_SPLIT_FRACTION,
        "probability": 0.3,
        "seed": 0,
        "match_attr": (),
        "same_viewpoint": True,
    }
    if config_path is None:
        return settings
    path = Path(config_path)
    with builtins.open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: top level must be an object")
    for key, value in raw.items():
        if key in _OPERATIONAL:
            continue
        if key not in settings:
            raise ValueError(f"{path}: unknown config key {key!r}")
        if key in ("ts", "ti", "split_fraction", "probability"):
            settings[key] = float(value)
        elif key == "seed":
            settings[key] = int(value)
        elif key in ("size_rule", "shape_rule"):
            settings[key] = _norm_token(value, _RULES, key)
        elif key == "roi":
            settings[key] = _norm_token(value, _ROI_MODES, key)
        elif key == "match_attr":
            if not isinstance(value, list) or not all(
                isinstance(v, str) for v in value
            ):
                raise ValueError(f"{path}: match_attr must be a list of strings")
            settings[key] = tuple(value)
        elif key == "same_viewpoint":
            settings[key] = _norm_flag(value, key)
    return settings


@dataclass
class DatasetHandle:
    """Everything augment() needs, built once per open()."""

    index: DatasetIndex | None
    pairing: PairingConfig
    policy: AugmentationPolicy
    split_fraction: float
    partners: dict
    scratch: PairScratch
    stats: SamplerStats = field(default_factory=SamplerStats)

    @property
    def closed(self) -> bool:
        return self.index is None

    def __len__(self) -> int:
        if self.index is None:
            raise ClosedHandleError("handle is closed")
        return len(self.index)


def open(root, config_path=None) -> DatasetHandle:
    """Index the dataset under root and prepare reproducible sample access.

    config_path, when given, names a JSON file using the batch CLI's key
    names (ts, ti, size_rule, shape_rule, roi, split_fraction, probability,
    seed, match_attr, same_viewpoint). Raises ValueError on bad settings
    and the usual dataset errors on bad data.
    """
    s = _read_settings(config_path)
    pairing = PairingConfig(
        t_s=s["ts"],
        t_i=s["ti"],
        size_rule=s["size_rule"],
        shape_rule=s["shape_rule"],
        require_same_viewpoint=s["same_viewpoint"],
        match_attributes=s["match_attr"],
    )
    policy = AugmentationPolicy(
        probability=s["probability"], seed=s["seed"], roi_mode=s["roi"]
    )
    index = load_dataset(root)
    scratch = PairScratch()
    partners = partner_lists(index, pairing, scratch=scratch)
    return DatasetHandle(
        index=index,
        pairing=pairing,
        policy=policy,
        split_fraction=s["split_fraction"],
        partners=partners,
        scratch=scratch,
    )


def augment(handle: DatasetHandle, index: int, epoch: int):
    """Return (buffer, label, flag) for one sample.

    buffer is the HxWx3 uint8 array (composited when the per-sample draw
    fires and a partner exists, the untouched source image otherwise),
    label is the identity string, flag says whether a swap happened.
    """
    if handle.closed:
        raise ClosedHandleError("handle is closed")
    size = len(handle.index)
    if not 0 <= index < size:
        raise IndexOutOfRangeError(index, size)
    outcome = _augment_one(
        handle.index,
        index,
        epoch,
        handle.policy,
        handle.pairing,
        partners=handle.partners,
        split_fraction=handle.split_fraction,
        scratch=handle.scratch,
        stats=handle.stats,
    )
    buffer = outcome.image
    if not buffer.flags["C_CONTIGUOUS"]:
        buffer = np.ascontiguousarray(buffer)
    return buffer, outcome.label, outcome.augmented


def close(handle: DatasetHandle) -> None:
    """Release the handle. Safe to call more than once."""
    handle.index = None
    handle.partners = {}
