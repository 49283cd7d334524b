"""Feature-space temporal mixing and the Hide-and-Seek masking baseline.

Operates on per-segment feature matrices (S segments x D dims) instead of
voxels. The temporal mix draws its interval exactly like the clip-space
temporal sampler, so a feature matrix stored as an (S,1,1,D) clip mixes
bit-identically through either path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clips import SoftLabel, VideoClip
from .errors import (
    DimZero,
    LabelDimMismatch,
    ShapeMismatch,
    TooManyBins,
    ValueOutOfRange,
)
from .mixers import MixRecipe
from .rng import RngStream
from .sampler import CuboidCoords, MixVariant, sample_lambda, sample_temporal_cuboid

DEFAULT_HIDE_BINS = 16
DEFAULT_HIDE_PROB = 0.5


@dataclass(frozen=True)
class FeatureSequence:
    """S x D float32 per-segment features with a clip-level soft label."""

    data: np.ndarray
    label: SoftLabel

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float32)
        if data.ndim != 2:
            raise ShapeMismatch(f"features must be 2-D (S,D), got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise DimZero(f"features need S,D >= 1, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueOutOfRange("features must be finite")
        data = np.ascontiguousarray(data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def segments(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def temporal_featmix(
    fA: FeatureSequence,
    fB: FeatureSequence,
    alpha: float,
    rng: RngStream,
) -> tuple[FeatureSequence, MixRecipe]:
    """Replace a contiguous run of fA's segment rows with fB's.

    The interval is sampled exactly like the clip-space temporal cuboid
    (length S*lambda around a uniform center, clamped); the label mixes by
    the exact surviving row fraction.
    """
    if fA.data.shape != fB.data.shape:
        raise ShapeMismatch(f"feature shapes differ: {fA.data.shape} vs {fB.data.shape}")
    if fA.label.k != fB.label.k:
        raise LabelDimMismatch(f"label sizes differ: {fA.label.k} vs {fB.label.k}")
    path = rng.path
    s = fA.segments
    lam = sample_lambda(alpha, rng)
    coords = sample_temporal_cuboid(lam, s, 1, 1, rng)

    out = np.array(fA.data)
    out[coords.t1:coords.t2] = fB.data[coords.t1:coords.t2]
    cut = coords.t2 - coords.t1
    weights = np.array([s - cut, cut], dtype=np.float64) / float(s)
    mixed = weights[0] * fA.label.masses + weights[1] * fB.label.masses
    recipe = MixRecipe(
        variant=MixVariant.TEMPORAL,
        alpha=alpha,
        lambda_sampled=lam,
        coords=coords,
        keep_fraction=float(weights[0]),
        donor_ids=(),
        rng_path=path,
    )
    return FeatureSequence(out, SoftLabel(mixed)), recipe


def hide_and_seek(
    f: FeatureSequence,
    n_bins: int = DEFAULT_HIDE_BINS,
    hide_prob: float = DEFAULT_HIDE_PROB,
    *,
    rng: RngStream,
) -> FeatureSequence:
    """Zero whole contiguous segment bins independently; label unchanged.

    Segments split into n_bins near-equal bins (first S mod n_bins bins one
    longer); each bin is hidden with probability hide_prob.
    """
    if n_bins < 1 or n_bins > f.segments:
        raise TooManyBins(f"n_bins must be in [1, S={f.segments}], got {n_bins}")
    if not 0.0 <= hide_prob <= 1.0:
        raise ValueOutOfRange(f"hide_prob must be in [0,1], got {hide_prob}")

    out = np.array(f.data)
    base, rem = divmod(f.segments, n_bins)
    start = 0
    for b in range(n_bins):
        size = base + (1 if b < rem else 0)
        if rng.uniform() < hide_prob:
            out[start:start + size] = 0.0
        start += size
    return FeatureSequence(out, f.label)


def feature_to_clip(f: FeatureSequence) -> VideoClip:
    """Pack S x D features as an (S,1,1,D) clip for container storage."""
    return VideoClip(f.data.reshape(f.segments, 1, 1, f.dim))


def clip_to_feature(clip: VideoClip, label: SoftLabel) -> FeatureSequence:
    """Unpack an (S,1,1,D) clip back into a feature sequence."""
    if clip.height != 1 or clip.width != 1:
        raise ShapeMismatch(
            f"feature clips must have H=W=1, got shape {clip.shape}"
        )
    return FeatureSequence(clip.data.reshape(clip.frames, clip.channels), label)
