"""Core video and label data model.

A :class:`VideoClip` is a dense (T, H, W, C) float32 voxel tensor. Pixel clips
keep values in [0, 1]; feature tensors stored in the same container are
unrestricted. A :class:`SoftLabel` is a nonnegative class-mass vector summing
to one. Both are immutable after construction (the backing arrays are marked
read-only), so values can be shared freely between concurrent tasks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import (
    DimZero,
    LabelTooShort,
    MassNotUnit,
    NegativeMass,
    ShapeMismatch,
    ValueOutOfRange,
)

MASS_TOL = 1e-9


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class VideoClip:
    """Dense (T, H, W, C) float32 voxel tensor, row-major T->H->W->C."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float32)
        if data.ndim != 4:
            raise ShapeMismatch(f"clip data must be 4-D (T,H,W,C), got shape {data.shape}")
        for name, dim in zip("THWC", data.shape):
            if dim < 1:
                raise DimZero(f"dimension {name} must be >= 1, got {dim}")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def channels(self) -> int:
        return self.data.shape[3]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape

    def validate_pixel_range(self) -> "VideoClip":
        """Assert the pixel-data invariant (all values in [0, 1])."""
        lo = float(self.data.min())
        hi = float(self.data.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueOutOfRange(
                f"pixel clip values must lie in [0,1], found range [{lo}, {hi}]"
            )
        return self


@dataclass(frozen=True)
class SoftLabel:
    """Nonnegative class masses summing to 1 (within {MASS_TOL}). K >= 2.

    Construction validates; masses are never silently renormalized.
    """

    masses: np.ndarray

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=np.float64)
        if masses.ndim != 1 or masses.size < 2:
            raise LabelTooShort(f"label needs K >= 2 masses, got shape {masses.shape}")
        if np.any(masses < 0.0):
            k = int(np.argmin(masses))
            raise NegativeMass(f"mass[{k}] = {masses[k]} is negative")
        total = float(masses.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise MassNotUnit(f"masses sum to {total!r}, expected 1 within {MASS_TOL}")
        object.__setattr__(self, "masses", _freeze(masses))

    @property
    def k(self) -> int:
        return self.masses.size

    @classmethod
    def one_hot(cls, index: int, k: int) -> "SoftLabel":
        if not 0 <= index < k:
            raise ValueOutOfRange(f"one-hot index {index} outside [0, {k})")
        masses = np.zeros(k, dtype=np.float64)
        masses[index] = 1.0
        return cls(masses)


def validate_label(raw: Sequence[float] | np.ndarray) -> SoftLabel:
    """Check a raw vector against the SoftLabel invariants without renormalizing."""
    return SoftLabel(np.asarray(raw, dtype=np.float64))


class BatchItem(NamedTuple):
    id: str
    clip: VideoClip
    label: SoftLabel


@dataclass(frozen=True)
class ClipBatch:
    """Ordered (id, clip, label) triples with homogeneous shapes and K."""

    items: tuple[BatchItem, ...]

    def __post_init__(self):
        items = tuple(BatchItem(*it) for it in self.items)
        if not items:
            raise ShapeMismatch("batch must be nonempty")
        shape = items[0].clip.shape
        k = items[0].label.k
        for it in items:
            if it.clip.shape != shape:
                raise ShapeMismatch(
                    f"clip {it.id!r} has shape {it.clip.shape}, batch shape is {shape}"
                )
            if it.label.k != k:
                raise ShapeMismatch(f"label {it.id!r} has K={it.label.k}, batch K is {k}")
        object.__setattr__(self, "items", items)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.items[0].clip.shape

    @property
    def k(self) -> int:
        return self.items[0].label.k

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[BatchItem]:
        return iter(self.items)

    def __getitem__(self, i: int) -> BatchItem:
        return self.items[i]

    def stacked(self) -> np.ndarray:
        """(N, T, H, W, C) float32 view of all clips."""
        return np.stack([it.clip.data for it in self.items])

    def labels(self) -> np.ndarray:
        """(N, K) float64 matrix of label masses."""
        return np.stack([it.label.masses for it in self.items])
