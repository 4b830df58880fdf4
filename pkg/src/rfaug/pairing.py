"""Pair selection: which (foreground donor, background donor) pairs may merge.

Two gates look at mask geometry:

* size: the area ratio min(A_i, A_j) / max(A_i, A_j) against threshold t_s;
* shape: overlap (intersection over union) of the two silhouettes after
  bbox-cropping each onto a shared square canvas, against threshold t_i.

Both gates run in one of two directions. "as_written" keeps the inequality
of the original formulation, ratio < t_s and overlap < t_i, which pairs
dissimilar subjects; "similarity" flips them (>= t_s, >= t_i) to pair
lookalikes. Two metadata gates follow: equal viewpoint (optional) and
equality on a configured list of attribute names.

Rejection reasons are attributed in the fixed order size, shape, viewpoint,
attributes, with short-circuit evaluation.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import EmptyMaskError, MissingAttributeError
from .maskops import NORMALIZE_CANVAS, mask_iou, normalize_silhouette
from .model import DatasetIndex, SampleRecord, load_mask

SIZE_RULES = ("as_written", "similarity")
SHAPE_RULES = SIZE_RULES
ROI_MODES = ("full_body", "upper_body")
REJECT_ORDER = ("size", "shape", "viewpoint", "attributes")


@dataclass(frozen=True)
class PairingConfig:
    """Thresholds, rule directions, and metadata gates."""

    t_s: float = 0.8
    t_i: float = 0.7
    size_rule: str = "as_written"
    shape_rule: str = "as_written"
    require_same_viewpoint: bool = True
    match_attributes: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.t_s <= 1.0:
            raise ValueError(f"t_s must lie in [0, 1], got {self.t_s}")
        if not 0.0 <= self.t_i <= 1.0:
            raise ValueError(f"t_i must lie in [0, 1], got {self.t_i}")
        if self.size_rule not in SIZE_RULES:
            raise ValueError(f"size_rule must be one of {SIZE_RULES}, got {self.size_rule!r}")
        if self.shape_rule not in SHAPE_RULES:
            raise ValueError(f"shape_rule must be one of {SHAPE_RULES}, got {self.shape_rule!r}")
        object.__setattr__(self, "match_attributes", tuple(self.match_attributes))

    def to_dict(self) -> dict:
        return {
            "t_s": self.t_s,
            "t_i": self.t_i,
            "size_rule": self.size_rule,
            "shape_rule": self.shape_rule,
            "require_same_viewpoint": self.require_same_viewpoint,
            "match_attributes": list(self.match_attributes),
        }


@dataclass(frozen=True)
class CompositeRecipe:
    """One planned composite: ROI donor, background donor, mode, label."""

    roi_source: str
    bg_source: str
    roi_mode: str = "full_body"
    label: str = ""

    def __post_init__(self):
        if self.roi_source == self.bg_source:
            raise ValueError("a recipe needs two distinct records")
        if self.roi_mode not in ROI_MODES:
            raise ValueError(f"roi_mode must be one of {ROI_MODES}, got {self.roi_mode!r}")


def size_ratio(area_a: int, area_b: int) -> float:
    """min/max area ratio in (0, 1]; both areas must be positive."""
    if area_a <= 0 or area_b <= 0:
        raise EmptyMaskError("size ratio needs two non-empty masks")
    if area_a < area_b:
        return area_a / area_b
    return area_b / area_a


@lru_cache(maxsize=2048)
def _silhouette_cached(mask_file: str, threshold: int, canvas: int) -> np.ndarray:
    sil = normalize_silhouette(load_mask(mask_file, threshold), canvas)
    sil.setflags(write=False)
    return sil


def record_silhouette(record: SampleRecord, canvas: int = NORMALIZE_CANVAS) -> np.ndarray:
    """The record's silhouette on the shared comparison canvas, cached."""
    return _silhouette_cached(str(record.mask_file), record.mask_threshold, canvas)


class PairScratch:
    """Per-enumeration memo for silhouette overlap values.

    Overlap is symmetric, so it is keyed on the unordered id pair. The lock
    makes the memo safe to share across worker threads.
    """

    def __init__(self):
        self._iou: dict[tuple[str, str], float] = {}
        self._lock = threading.Lock()

    def overlap(self, a: SampleRecord, b: SampleRecord) -> float:
        key = (a.sample_id, b.sample_id) if a.sample_id < b.sample_id else (
            b.sample_id,
            a.sample_id,
        )
        with self._lock:
            hit = self._iou.get(key)
        if hit is not None:
            return hit
        value = mask_iou(record_silhouette(a), record_silhouette(b))
        with self._lock:
            self._iou[key] = value
        return value


def _size_ok(a: SampleRecord, b: SampleRecord, cfg: PairingConfig) -> bool:
    r = size_ratio(a.area, b.area)
    if cfg.size_rule == "as_written":
        return r < cfg.t_s
    return r >= cfg.t_s


def _shape_ok(
    a: SampleRecord, b: SampleRecord, cfg: PairingConfig, scratch: PairScratch | None
) -> bool:
    if a.area == 0 or b.area == 0:
        raise EmptyMaskError("shape overlap needs two non-empty masks")
    if scratch is not None:
        iou = scratch.overlap(a, b)
    else:
        iou = mask_iou(record_silhouette(a), record_silhouette(b))
    if cfg.shape_rule == "as_written":
        return iou < cfg.t_i
    return iou >= cfg.t_i


def size_shape_compatible(
    a: SampleRecord,
    b: SampleRecord,
    cfg: PairingConfig,
    scratch: PairScratch | None = None,
) -> bool:
    """True iff both geometric gates pass. Raises on an empty mask."""
    return _size_ok(a, b, cfg) and _shape_ok(a, b, cfg, scratch)


def metadata_compatible(a: SampleRecord, b: SampleRecord, cfg: PairingConfig) -> bool:
    """True iff viewpoints agree (when required) and every configured
    attribute matches. A configured attribute missing from either record
    raises MissingAttributeError."""
    for name in cfg.match_attributes:
        if name not in a.attributes:
            raise MissingAttributeError(name, a.sample_id)
        if name not in b.attributes:
            raise MissingAttributeError(name, b.sample_id)
    if cfg.require_same_viewpoint and a.viewpoint != b.viewpoint:
        return False
    for name in cfg.match_attributes:
        if a.attributes[name] != b.attributes[name]:
            return False
    return True


def classify_pair(
    a: SampleRecord,
    b: SampleRecord,
    cfg: PairingConfig,
    scratch: PairScratch | None = None,
) -> str | None:
    """None when the pair is accepted, else the first failing gate name.

    Evaluation short-circuits in REJECT_ORDER, so a pair failing the size
    gate never computes an overlap and a pair failing the viewpoint gate
    never reads attributes.
    """
    if not _size_ok(a, b, cfg):
        return "size"
    if not _shape_ok(a, b, cfg, scratch):
        return "shape"
    if cfg.require_same_viewpoint and a.viewpoint != b.viewpoint:
        return "viewpoint"
    for name in cfg.match_attributes:
        if name not in a.attributes:
            raise MissingAttributeError(name, a.sample_id)
        if name not in b.attributes:
            raise MissingAttributeError(name, b.sample_id)
        if a.attributes[name] != b.attributes[name]:
            return "attributes"
    return None


@dataclass
class PairingCounters:
    """Tally of an enumeration run."""

    considered: int = 0
    accepted: int = 0
    rejected: dict = field(default_factory=lambda: {k: 0 for k in REJECT_ORDER})
    skipped_empty: int = 0
    skipped_unlabeled: int = 0


def candidate_pairs(
    index: DatasetIndex,
    cfg: PairingConfig,
    roi_mode: str = "full_body",
    counters: PairingCounters | None = None,
    scratch: PairScratch | None = None,
) -> Iterator[CompositeRecipe]:
    """Yield accepted recipes in deterministic i-major, j-minor index order.

    Records with empty masks never pair; records with empty labels can only
    donate a background. With n usable records and gates that accept
    everything this yields exactly n*n - n recipes.
    """
    if roi_mode not in ROI_MODES:
        raise ValueError(f"roi_mode must be one of {ROI_MODES}, got {roi_mode!r}")
    if scratch is None:
        scratch = PairScratch()
    for ri in index.records:
        if ri.area == 0:
            if counters is not None:
                counters.skipped_empty += 1
            continue
        if not ri.label:
            if counters is not None:
                counters.skipped_unlabeled += 1
            continue
        for rj in index.records:
            if rj.sample_id == ri.sample_id or rj.area == 0:
                continue
            if counters is not None:
                counters.considered += 1
            reason = classify_pair(ri, rj, cfg, scratch)
            if reason is None:
                if counters is not None:
                    counters.accepted += 1
                yield CompositeRecipe(ri.sample_id, rj.sample_id, roi_mode, ri.label)
            elif counters is not None:
                counters.rejected[reason] += 1
