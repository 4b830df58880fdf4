"""Training-loop binding over the rfaug augmentation engine."""
from rfaug_dataloader.binding import (
    ClosedHandleError,
    DatasetHandle,
    IndexOutOfRangeError,
    augment,
    close,
    open,
)

__version__ = "0.1.0"

__all__ = [
    "ClosedHandleError",
    "DatasetHandle",
    "IndexOutOfRangeError",
    "augment",
    "close",
    "open",
]
