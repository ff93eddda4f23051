"""Head-boundary extraction from per-pixel segmentation masks.

Real masks contain speckle, so the box comes from the largest 4-connected
component after thresholding, with small components discarded.  Ties between
equal-size components break toward the one whose first pixel comes earliest
in row-major order, for determinism.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import DomainError, NoHeadDetected, RleLengthMismatch
from .geometry import Rect

DEFAULT_THRESHOLD = 0.5
DEFAULT_MIN_COMPONENT_PX = 64

# 4-connectivity structuring element
_STRUCTURE = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class SegMask:
    """Single-channel head-confidence mask, row-major, values in [0, 1]."""

    width: int
    height: int
    confidences: np.ndarray  # (height, width) float

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DomainError(f"mask dimensions must be positive, got {self.width}x{self.height}")
        conf = np.asarray(self.confidences, dtype=np.float64)
        if conf.size != self.width * self.height:
            raise DomainError(
                f"confidence buffer has {conf.size} values, "
                f"expected {self.width}x{self.height}={self.width * self.height}"
            )
        conf = conf.reshape(self.height, self.width)
        if conf.size and (conf.min() < 0.0 or conf.max() > 1.0):
            raise DomainError("mask confidences must lie in [0, 1]")
        conf.setflags(write=False)
        object.__setattr__(self, "confidences", conf)


def mask_to_box(mask: SegMask, threshold: float = DEFAULT_THRESHOLD,
                min_component_px: int = DEFAULT_MIN_COMPONENT_PX) -> Rect:
    """Tight pixel bounds of the largest surviving connected component.

    The rect uses pixel-count extents: a full 64x64 foreground yields
    Rect(0, 0, 64, 64).
    """
    binary = mask.confidences >= threshold
    return _largest_component_box(binary, min_component_px)


def _largest_component_box(binary: np.ndarray, min_component_px: int) -> Rect:
    labels, n = ndimage.label(binary, structure=_STRUCTURE)
    if n == 0:
        raise NoHeadDetected("no foreground pixels above threshold")
    counts = np.bincount(labels.ravel())[1:]
    surviving = np.flatnonzero(counts >= min_component_px) + 1
    if surviving.size == 0:
        raise NoHeadDetected(
            f"no component reaches min_component_px={min_component_px} "
            f"(largest was {int(counts.max())})"
        )
    best = counts[surviving - 1].max()
    tied = surviving[counts[surviving - 1] == best]
    if len(tied) == 1:
        label = int(tied[0])
    else:
        flat = labels.ravel()
        label = int(min(tied, key=lambda t: int(np.argmax(flat == t))))
    rows, cols = np.nonzero(labels == label)
    x0, x1 = int(cols.min()), int(cols.max())
    y0, y1 = int(rows.min()), int(rows.max())
    return Rect(float(x0), float(y0), float(x1 - x0 + 1), float(y1 - y0 + 1))


def rle_decode(width: int, height: int, runs: Sequence[int]) -> np.ndarray:
    """Decode alternating background-first run lengths into a bool mask."""
    total = width * height
    runs = list(runs)
    if any((not isinstance(r, (int, np.integer))) or r < 0 for r in runs):
        raise RleLengthMismatch(f"runs must be non-negative integers, got {runs!r}")
    if sum(runs) != total:
        raise RleLengthMismatch(f"runs sum to {sum(runs)}, expected {width}x{height}={total}")
    flat = np.zeros(total, dtype=bool)
    pos = 0
    for i, run in enumerate(runs):
        if i % 2 == 1:
            flat[pos:pos + run] = True
        pos += run
    return flat.reshape(height, width)


def rle_encode(binary: np.ndarray) -> list[int]:
    """Encode a bool mask as alternating background-first run lengths.

    A mask starting with foreground gets a leading zero-length background
    run so decoders never need to guess the phase.
    """
    flat = np.asarray(binary, dtype=bool).ravel()
    if flat.size == 0:
        return []
    boundaries = np.flatnonzero(np.diff(flat)) + 1
    edges = np.concatenate(([0], boundaries, [flat.size]))
    runs = np.diff(edges).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return [int(r) for r in runs]


def box_from_rle(width: int, height: int, runs: Sequence[int],
                 min_component_px: int = DEFAULT_MIN_COMPONENT_PX) -> Rect:
    """Head box straight from the wire encoding; equivalent to decoding and
    running mask_to_box."""
    return _largest_component_box(rle_decode(width, height, runs), min_component_px)
