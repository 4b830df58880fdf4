"""Dataset records and loading.

A dataset is a directory with a meta.jsonl file. Its first line is a header
object declaring the viewpoint vocabulary and the attribute schema; every
following line describes one sample:

    {"viewpoints": ["front", "back", "side"], "attributes": ["age"]}
    {"sample_id": "p001_c1", "image": "img/p001_c1.png",
     "mask": "msk/p001_c1.png", "label": "p001", "viewpoint": "front",
     "attributes": {"age": "adult"}}

Images are RGB; masks are single-channel rasters binarized at a threshold.
Records carry cached geometry (area, tight bbox, native size) so pairing
never re-reads mask files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from types import MappingProxyType
from typing import Iterator, Mapping

import numpy as np
from PIL import Image

from .errors import (
    DimensionMismatchError,
    MetadataParseError,
    MissingFileError,
)
from .maskops import BoundingBox, mask_bbox

METADATA_NAME = "meta.jsonl"
MASK_THRESHOLD = 127  # strictly-greater midpoint for soft masks


def binarize_mask(raw: np.ndarray, threshold: int = MASK_THRESHOLD) -> np.ndarray:
    """Map a grayscale raster to {0,1}: foreground where value > threshold."""
    raw = np.asarray(raw)
    if raw.ndim != 2:
        raise ValueError(f"mask raster must be single-channel, got shape {raw.shape}")
    return (raw > threshold).astype(np.uint8)


@lru_cache(maxsize=1024)
def _image_cached(path: str) -> np.ndarray:
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except FileNotFoundError as exc:
        raise MissingFileError(f"image file not found: {path}") from exc
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=1024)
def _mask_cached(path: str, threshold: int) -> np.ndarray:
    try:
        with Image.open(path) as im:
            raw = np.asarray(im.convert("L"))
    except FileNotFoundError as exc:
        raise MissingFileError(f"mask file not found: {path}") from exc
    bits = binarize_mask(raw, threshold)
    bits.setflags(write=False)
    return bits


def load_image(path: str | Path) -> np.ndarray:
    """Read an image as a read-only uint8 (H, W, 3) RGB array, cached."""
    return _image_cached(str(path))


def load_mask(path: str | Path, threshold: int = MASK_THRESHOLD) -> np.ndarray:
    """Read a mask as a read-only uint8 {0,1} array, cached."""
    return _mask_cached(str(path), threshold)


def clear_raster_cache() -> None:
    _image_cached.cache_clear()
    _mask_cached.cache_clear()


@dataclass(frozen=True)
class SampleRecord:
    """One dataset sample plus cached geometry.

    label may be empty only for background-only donors; such records never
    lend a region of interest. bbox is None when the mask is empty.
    """

    sample_id: str
    image_path: str
    mask_path: str
    label: str
    viewpoint: str
    attributes: Mapping[str, str]
    image_file: Path = field(compare=False, repr=False)
    mask_file: Path = field(compare=False, repr=False)
    width: int = field(compare=False)
    height: int = field(compare=False)
    area: int = field(compare=False)
    bbox: BoundingBox | None = field(compare=False)
    mask_threshold: int = field(compare=False, default=MASK_THRESHOLD)

    def load_image(self) -> np.ndarray:
        return load_image(self.image_file)

    def load_mask(self) -> np.ndarray:
        return load_mask(self.mask_file, self.mask_threshold)

    @property
    def native_size(self) -> tuple[int, int]:
        return (self.width, self.height)


@dataclass(frozen=True)
class DatasetIndex:
    """Immutable view of a loaded dataset."""

    root: Path
    viewpoints: tuple[str, ...]
    attribute_names: tuple[str, ...]
    records: tuple[SampleRecord, ...]

    def __post_init__(self):
        by_id = {rec.sample_id: rec for rec in self.records}
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[SampleRecord]:
        return iter(self.records)

    def __getitem__(self, i: int) -> SampleRecord:
        return self.records[i]

    def record(self, sample_id: str) -> SampleRecord:
        try:
            return self._by_id[sample_id]
        except KeyError:
            raise KeyError(f"unknown sample_id {sample_id!r}") from None


_ROW_KEYS = ("sample_id", "image", "mask", "label", "viewpoint")


def _parse_header(line: str, line_no: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MetadataParseError(f"header is not valid JSON: {exc}", line_no) from None
    if not isinstance(obj, dict) or "viewpoints" not in obj:
        raise MetadataParseError("first line must be a header with 'viewpoints'", line_no)
    vps = obj["viewpoints"]
    attrs = obj.get("attributes", [])
    if not isinstance(vps, list) or not all(isinstance(v, str) and v for v in vps):
        raise MetadataParseError("'viewpoints' must be a list of names", line_no)
    if not isinstance(attrs, list) or not all(isinstance(a, str) and a for a in attrs):
        raise MetadataParseError("'attributes' must be a list of names", line_no)
    if len(set(vps)) != len(vps):
        raise MetadataParseError("duplicate viewpoint names", line_no)
    return tuple(vps), tuple(attrs)


def _parse_row(line: str, line_no: int) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MetadataParseError(f"not valid JSON: {exc}", line_no) from None
    if not isinstance(obj, dict):
        raise MetadataParseError("row must be an object", line_no)
    for key in _ROW_KEYS:
        if key not in obj:
            raise MetadataParseError(f"missing key {key!r}", line_no)
        if not isinstance(obj[key], str):
            raise MetadataParseError(f"key {key!r} must be a string", line_no)
    if not obj["sample_id"]:
        raise MetadataParseError("sample_id must be non-empty", line_no)
    attrs = obj.get("attributes", {})
    if not isinstance(attrs, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in attrs.items()
    ):
        raise MetadataParseError("'attributes' must map names to strings", line_no)
    obj["attributes"] = attrs
    return obj


def _iter_metadata(meta_path: Path):
    """Yield ('header', line_no, parsed) then ('row', line_no, parsed)."""
    if not meta_path.is_file():
        raise MissingFileError(f"metadata file not found: {meta_path}")
    with open(meta_path, "r", encoding="utf-8") as fh:
        saw_header = False
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if not saw_header:
                saw_header = True
                yield "header", line_no, _parse_header(line, line_no)
            else:
                yield "row", line_no, _parse_row(line, line_no)
    if not saw_header:
        raise MetadataParseError(f"metadata file {meta_path} is empty")


def _build_record(
    row: dict,
    line_no: int,
    root: Path,
    viewpoints: tuple[str, ...],
    threshold: int,
    allow_unlabeled: bool,
) -> SampleRecord:
    if row["viewpoint"] not in viewpoints:
        raise MetadataParseError(
            f"viewpoint {row['viewpoint']!r} not in header vocabulary", line_no
        )
    if not row["label"] and not allow_unlabeled:
        raise MetadataParseError(
            f"record {row['sample_id']!r} has an empty label", line_no
        )
    image_file = root / row["image"]
    mask_file = root / row["mask"]
    if not image_file.is_file():
        raise MissingFileError(f"image file not found: {image_file}")
    if not mask_file.is_file():
        raise MissingFileError(f"mask file not found: {mask_file}")
    bits = load_mask(mask_file, threshold)
    height, width = bits.shape
    image = load_image(image_file)
    if image.shape[:2] != bits.shape:
        raise DimensionMismatchError(
            f"record {row['sample_id']!r}: image {image.shape[:2]} vs mask {bits.shape}"
        )
    area = int(np.count_nonzero(bits))
    bbox = mask_bbox(bits) if area else None
    return SampleRecord(
        sample_id=row["sample_id"],
        image_path=row["image"],
        mask_path=row["mask"],
        label=row["label"],
        viewpoint=row["viewpoint"],
        attributes=MappingProxyType(dict(row["attributes"])),
        image_file=image_file,
        mask_file=mask_file,
        width=width,
        height=height,
        area=area,
        bbox=bbox,
        mask_threshold=threshold,
    )


def load_dataset(
    root: str | Path,
    metadata: str | Path | None = None,
    *,
    threshold: int = MASK_THRESHOLD,
    allow_unlabeled_bg: bool = False,
) -> DatasetIndex:
    """Load a dataset directory into an immutable index.

    Raises on the first problem found. allow_unlabeled_bg accepts records
    with an empty label; they can only serve as background donors.
    """
    root = Path(root)
    meta_path = Path(metadata) if metadata is not None else root / METADATA_NAME
    viewpoints: tuple[str, ...] = ()
    attr_names: tuple[str, ...] = ()
    records: list[SampleRecord] = []
    seen: set[str] = set()
    for kind, line_no, payload in _iter_metadata(meta_path):
        if kind == "header":
            viewpoints, attr_names = payload
            continue
        row = payload
        if row["sample_id"] in seen:
            raise MetadataParseError(f"duplicate sample_id {row['sample_id']!r}", line_no)
        seen.add(row["sample_id"])
        records.append(
            _build_record(row, line_no, root, viewpoints, threshold, allow_unlabeled_bg)
        )
    return DatasetIndex(
        root=root,
        viewpoints=viewpoints,
        attribute_names=attr_names,
        records=tuple(records),
    )


def validate_dataset(
    root: str | Path,
    metadata: str | Path | None = None,
    *,
    threshold: int = MASK_THRESHOLD,
    allow_unlabeled_bg: bool = False,
) -> list[dict]:
    """Scan a dataset and collect problems instead of raising.

    Returns a list of {"line", "sample_id", "kind", "detail"} dicts; empty
    means the dataset is clean. Empty masks are reported: such records are
    loadable but can never take part in a composite.
    """
    root = Path(root)
    meta_path = Path(metadata) if metadata is not None else root / METADATA_NAME
    problems: list[dict] = []
    seen: set[str] = set()
    viewpoints: tuple[str, ...] = ()
    try:
        for kind, line_no, payload in _iter_metadata(meta_path):
            if kind == "header":
                viewpoints, _ = payload
                continue
            row = payload
            sid = row["sample_id"]
            if sid in seen:
                problems.append(
                    {
                        "line": line_no,
                        "sample_id": sid,
                        "kind": "duplicate_id",
                        "detail": f"duplicate sample_id {sid!r}",
                    }
                )
                continue
            seen.add(sid)
            try:
                rec = _build_record(row, line_no, root, viewpoints, threshold, allow_unlabeled_bg)
            except (MetadataParseError, MissingFileError, DimensionMismatchError) as exc:
                problems.append(
                    {
                        "line": line_no,
                        "sample_id": sid,
                        "kind": type(exc).__name__,
                        "detail": str(exc),
                    }
                )
                continue
            if rec.area == 0:
                problems.append(
                    {
                        "line": line_no,
                        "sample_id": sid,
                        "kind": "empty_mask",
                        "detail": f"record {sid!r} has an empty mask",
                    }
                )
    except MetadataParseError as exc:
        problems.append(
            {
                "line": exc.line or 0,
                "sample_id": "",
                "kind": "MetadataParseError",
                "detail": str(exc),
            }
        )
    return problems


def write_metadata(index: DatasetIndex, path: str | Path) -> None:
    """Serialize an index back to JSONL; loading it again gives equal records."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "viewpoints": list(index.viewpoints),
            "attributes": list(index.attribute_names),
        }
        fh.write(json.dumps(header) + "\n")
        for rec in index.records:
            row = {
                "sample_id": rec.sample_id,
                "image": rec.image_path,
                "mask": rec.mask_path,
                "label": rec.label,
                "viewpoint": rec.viewpoint,
                "attributes": dict(rec.attributes),
            }
            fh.write(json.dumps(row) + "\n")
