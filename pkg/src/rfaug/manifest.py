"""Run manifests: one JSONL row per emitted composite, plus verification.

A manifest line records where a composite was written, which records fed
it, the label it carries, and a hash of the configuration that produced
the run, so a training job can audit exactly what it is consuming.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import ManifestParseError
from .model import DatasetIndex

_FIELDS = (
    "synthetic_path",
    "roi_source",
    "bg_source",
    "label",
    "roi_mode",
    "viewpoint",
    "config_hash",
    "native_size",
)


def stable_digest(payload) -> str:
    """sha256 hex of a JSON-serializable object, independent of dict order."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ManifestRecord:
    """One emitted composite."""

    synthetic_path: str
    roi_source: str
    bg_source: str
    label: str
    roi_mode: str
    viewpoint: str
    config_hash: str
    native_size: tuple[int, int]

    def to_json_dict(self) -> dict:
        return {
            "synthetic_path": self.synthetic_path,
            "roi_source": self.roi_source,
            "bg_source": self.bg_source,
            "label": self.label,
            "roi_mode": self.roi_mode,
            "viewpoint": self.viewpoint,
            "config_hash": self.config_hash,
            "native_size": list(self.native_size),
        }

    @classmethod
    def from_json_dict(cls, obj: dict, line: int | None = None) -> "ManifestRecord":
        for key in _FIELDS:
            if key not in obj:
                raise ManifestParseError(f"missing field {key!r}", line)
        size = obj["native_size"]
        if (
            not isinstance(size, (list, tuple))
            or len(size) != 2
            or not all(isinstance(v, int) for v in size)
        ):
            raise ManifestParseError("native_size must be a [width, height] pair", line)
        fields = {key: obj[key] for key in _FIELDS if key != "native_size"}
        for key, value in fields.items():
            if not isinstance(value, str):
                raise ManifestParseError(f"field {key!r} must be a string", line)
        return cls(native_size=(size[0], size[1]), **fields)


def write_manifest(records: Iterable[ManifestRecord], path: str | Path) -> int:
    """Write records as JSONL; returns how many lines were written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json_dict(), sort_keys=True) + "\n")
            count += 1
    return count


def read_manifest(path: str | Path) -> list[ManifestRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestParseError(f"not valid JSON: {exc}", line_no) from None
            if not isinstance(obj, dict):
                raise ManifestParseError("row must be an object", line_no)
            records.append(ManifestRecord.from_json_dict(obj, line_no))
    return records


def verify_manifest(
    path: str | Path,
    index: DatasetIndex,
    *,
    base_dir: str | Path | None = None,
) -> list[dict]:
    """Audit a manifest against its dataset.

    Flags rows whose label does not match the ROI donor's label, rows whose
    image file is missing (paths resolve relative to the manifest unless
    base_dir is given), rows naming unknown records, and rows whose
    config_hash differs from the first row's. An empty list means valid.
    """
    path = Path(path)
    base = Path(base_dir) if base_dir is not None else path.parent
    issues: list[dict] = []
    try:
        records = read_manifest(path)
    except ManifestParseError as exc:
        return [{"line": exc.line or 0, "kind": "parse", "detail": str(exc)}]
    expected_hash = records[0].config_hash if records else ""
    for line_no, rec in enumerate(records, start=1):
        for role, sid in (("roi_source", rec.roi_source), ("bg_source", rec.bg_source)):
            try:
                index.record(sid)
            except KeyError:
                issues.append(
                    {
                        "line": line_no,
                        "kind": "unknown_record",
                        "detail": f"{role} {sid!r} is not in the dataset",
                    }
                )
        try:
            donor = index.record(rec.roi_source)
        except KeyError:
            donor = None
        if donor is not None and rec.label != donor.label:
            issues.append(
                {
                    "line": line_no,
                    "kind": "label_mismatch",
                    "detail": f"label {rec.label!r} but ROI donor carries {donor.label!r}",
                }
            )
        target = Path(rec.synthetic_path)
        if not target.is_absolute():
            target = base / target
        if not target.is_file():
            issues.append(
                {
                    "line": line_no,
                    "kind": "missing_file",
                    "detail": f"synthetic file not found: {target}",
                }
            )
        if rec.config_hash != expected_hash:
            issues.append(
                {
                    "line": line_no,
                    "kind": "config_hash_mismatch",
                    "detail": "config_hash differs from the first row",
                }
            )
    return issues
