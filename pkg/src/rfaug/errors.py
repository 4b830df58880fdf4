"""Exception types raised across the package.

Everything derives from AugmentationError so callers can catch one base
class; a few types double-inherit from builtins (FileNotFoundError,
IndexError) to stay friendly to generic handling code.
"""


class AugmentationError(Exception):
    """Base class for all errors raised by this package."""


class MissingFileError(AugmentationError, FileNotFoundError):
    """A referenced image, mask, or metadata file does not exist."""


class MetadataParseError(AugmentationError):
    """Metadata is malformed: bad JSON, missing keys, duplicate ids, bad values."""

    def __init__(self, message, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DimensionMismatchError(AugmentationError):
    """Two rasters that must share a shape do not."""


class EmptyMaskError(AugmentationError):
    """An operation needs at least one foreground bit and the mask has none."""


class FullMaskError(AugmentationError):
    """Inpainting needs at least one known pixel and the hole covers everything."""


class InvalidBoxError(AugmentationError):
    """A bounding box is degenerate or falls outside the raster it indexes."""


class IncompatiblePairError(AugmentationError):
    """A composite was requested for a pair the active constraints reject."""

    def __init__(self, message, reason: str = ""):
        super().__init__(message)
        self.reason = reason


class MissingAttributeError(AugmentationError):
    """An attribute named in the matching config is absent from a record."""

    def __init__(self, name: str, sample_id: str):
        super().__init__(f"record {sample_id!r} has no attribute {name!r}")
        self.name = name
        self.sample_id = sample_id


class CompositionOverflowError(AugmentationError):
    """A scaled region would land outside the target plate."""


class ManifestParseError(AugmentationError):
    """A manifest line is not valid JSON or lacks a required field."""

    def __init__(self, message, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
