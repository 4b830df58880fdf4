"""On-the-fly augmentation with counter-based randomness.

Every (seed, epoch, sample index) triple owns an independent random stream,
so the decision for a sample does not depend on worker count, call order,
or how many draws other samples made. Stream k of a sample is a Philox
generator keyed by the seed and the packed (epoch, index) pair.

For each request the sampler draws one uniform u; the sample is replaced
by a composite iff u < probability, which makes 0.0 a guaranteed
passthrough and 1.0 a guaranteed swap. A second draw picks the partner
from the sample's precomputed compatible list.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compositor import DEFAULT_SPLIT_FRACTION, SyntheticSample, compose
from .model import DatasetIndex, SampleRecord
from .pairing import (
    CompositeRecipe,
    PairingConfig,
    PairScratch,
    ROI_MODES,
    classify_pair,
)


@dataclass(frozen=True)
class AugmentationPolicy:
    """How often to swap, under which seed, and which region mode."""

    probability: float = 0.3
    seed: int = 0
    roi_mode: str = "full_body"

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability must lie in [0, 1], got {self.probability}")
        if self.roi_mode not in ROI_MODES:
            raise ValueError(f"roi_mode must be one of {ROI_MODES}, got {self.roi_mode!r}")

    def to_dict(self) -> dict:
        return {
            "probability": self.probability,
            "seed": self.seed,
            "roi_mode": self.roi_mode,
        }


def decision_stream(seed: int, epoch: int, index: int) -> np.random.Generator:
    """The private random stream of one (seed, epoch, index) triple."""
    if epoch < 0 or index < 0:
        raise ValueError("epoch and index must be non-negative")
    key = np.array(
        [seed & 0xFFFFFFFFFFFFFFFF, ((epoch & 0xFFFFFFFF) << 32) | (index & 0xFFFFFFFF)],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def augment_decision(policy: AugmentationPolicy, epoch: int, index: int) -> bool:
    """Whether this sample gets swapped this epoch. One uniform draw."""
    u = decision_stream(policy.seed, epoch, index).random()
    return bool(u < policy.probability)


def partner_lists(
    index: DatasetIndex,
    cfg: PairingConfig,
    scratch: PairScratch | None = None,
) -> dict[str, list[str]]:
    """Map each labeled record to its compatible background donors, in
    dataset order. Records with empty masks or labels map to empty lists."""
    if scratch is None:
        scratch = PairScratch()
    table: dict[str, list[str]] = {}
    for ri in index.records:
        partners: list[str] = []
        if ri.area > 0 and ri.label:
            for rj in index.records:
                if rj.sample_id == ri.sample_id or rj.area == 0:
                    continue
                if classify_pair(ri, rj, cfg, scratch) is None:
                    partners.append(rj.sample_id)
        table[ri.sample_id] = partners
    return table


@dataclass
class SamplerStats:
    """Counters accumulated across augment calls."""

    draws: int = 0
    augmented: int = 0
    passthrough_prob: int = 0
    passthrough_no_partner: int = 0

    def as_dict(self) -> dict:
        return {
            "draws": self.draws,
            "augmented": self.augmented,
            "passthrough_prob": self.passthrough_prob,
            "passthrough_no_partner": self.passthrough_no_partner,
        }


@dataclass(frozen=True)
class AugmentOutcome:
    """What a single augment call produced.

    image is either the record's native pixels (augmented False) or a
    composite plate (augmented True); label always belongs to the record
    at the requested index.
    """

    image: np.ndarray
    label: str
    augmented: bool
    record: SampleRecord
    synthetic: SyntheticSample | None = None


def augment(
    index: DatasetIndex,
    sample_index: int,
    epoch: int,
    policy: AugmentationPolicy,
    cfg: PairingConfig,
    *,
    partners: dict[str, list[str]] | None = None,
    split_fraction: float = DEFAULT_SPLIT_FRACTION,
    scratch: PairScratch | None = None,
    stats: SamplerStats | None = None,
) -> AugmentOutcome:
    """Return the sample at sample_index, possibly swapped for a composite.

    partners should be the table from partner_lists when many calls share
    one dataset; without it the list for this one record is computed on the
    spot. A record with no compatible partner passes through regardless of
    the draw, but the draw still happens so the stream stays aligned.
    """
    record = index[sample_index]
    if stats is not None:
        stats.draws += 1
    stream = decision_stream(policy.seed, epoch, sample_index)
    u = float(stream.random())
    swap = u < policy.probability

    candidates: list[str]
    if not swap:
        candidates = []
    elif partners is not None:
        candidates = partners.get(record.sample_id, [])
    elif record.area > 0 and record.label:
        if scratch is None:
            scratch = PairScratch()
        candidates = [
            rj.sample_id
            for rj in index.records
            if rj.sample_id != record.sample_id
            and rj.area > 0
            and classify_pair(record, rj, cfg, scratch) is None
        ]
    else:
        candidates = []

    if not swap or not candidates:
        if stats is not None:
            if swap:
                stats.passthrough_no_partner += 1
            else:
                stats.passthrough_prob += 1
        return AugmentOutcome(
            image=record.load_image(),
            label=record.label,
            augmented=False,
            record=record,
        )

    pick = int(stream.integers(0, len(candidates)))
    recipe = CompositeRecipe(
        roi_source=record.sample_id,
        bg_source=candidates[pick],
        roi_mode=policy.roi_mode,
        label=record.label,
    )
    synthetic = compose(
        recipe,
        index,
        cfg,
        split_fraction=split_fraction,
        scratch=scratch,
        enforce_constraints=False,
    )
    if stats is not None:
        stats.augmented += 1
    return AugmentOutcome(
        image=synthetic.image,
        label=synthetic.label,
        augmented=True,
        record=record,
        synthetic=synthetic,
    )
