"""Receptive-field augmentation: composite segmented foregrounds onto
repaired backgrounds from constraint-compatible partner records.

The public surface re-exported here is everything a training pipeline
needs: dataset loading, pair selection, composition, the on-the-fly
sampler, and manifest handling. The command line lives in rfaug.cli.
"""
from .compositor import (
    DEFAULT_SPLIT_FRACTION,
    DILATION_SIZE,
    SyntheticSample,
    compose,
    split_mask_rows,
)
from .errors import (
    AugmentationError,
    CompositionOverflowError,
    DimensionMismatchError,
    EmptyMaskError,
    FullMaskError,
    IncompatiblePairError,
    InvalidBoxError,
    ManifestParseError,
    MetadataParseError,
    MissingAttributeError,
    MissingFileError,
)
from .inpaint import DEFAULT_RADIUS, InpaintRequest, inpaint
from .manifest import (
    ManifestRecord,
    read_manifest,
    stable_digest,
    verify_manifest,
    write_manifest,
)
from .maskops import (
    NORMALIZE_CANVAS,
    BoundingBox,
    StructuringElement,
    crop_resize_preserve_aspect,
    dilate,
    mask_area,
    mask_bbox,
    mask_iou,
    normalize_silhouette,
    replicate_pad_to_square,
)
from .model import (
    MASK_THRESHOLD,
    DatasetIndex,
    SampleRecord,
    binarize_mask,
    load_dataset,
    load_image,
    load_mask,
    validate_dataset,
    write_metadata,
)
from .pairing import (
    CompositeRecipe,
    PairingConfig,
    PairingCounters,
    PairScratch,
    candidate_pairs,
    classify_pair,
    metadata_compatible,
    size_ratio,
    size_shape_compatible,
)
from .sampler import (
    AugmentationPolicy,
    AugmentOutcome,
    SamplerStats,
    augment,
    augment_decision,
    decision_stream,
    partner_lists,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentationError",
    "AugmentationPolicy",
    "AugmentOutcome",
    "BoundingBox",
    "CompositeRecipe",
    "CompositionOverflowError",
    "DatasetIndex",
    "DEFAULT_RADIUS",
    "DEFAULT_SPLIT_FRACTION",
    "DILATION_SIZE",
    "DimensionMismatchError",
    "EmptyMaskError",
    "FullMaskError",
    "IncompatiblePairError",
    "InpaintRequest",
    "InvalidBoxError",
    "ManifestParseError",
    "ManifestRecord",
    "MASK_THRESHOLD",
    "MetadataParseError",
    "MissingAttributeError",
    "MissingFileError",
    "NORMALIZE_CANVAS",
    "PairingConfig",
    "PairingCounters",
    "PairScratch",
    "SampleRecord",
    "SamplerStats",
    "StructuringElement",
    "SyntheticSample",
    "augment",
    "augment_decision",
    "binarize_mask",
    "candidate_pairs",
    "classify_pair",
    "compose",
    "crop_resize_preserve_aspect",
    "decision_stream",
    "dilate",
    "inpaint",
    "load_dataset",
    "load_image",
    "load_mask",
    "mask_area",
    "mask_bbox",
    "mask_iou",
    "metadata_compatible",
    "normalize_silhouette",
    "partner_lists",
    "read_manifest",
    "replicate_pad_to_square",
    "size_ratio",
    "size_shape_compatible",
    "split_mask_rows",
    "stable_digest",
    "validate_dataset",
    "verify_manifest",
    "write_manifest",
    "write_metadata",
]
