"""Cut-and-paste clip mixing plus the video-level Mixup and Cutout baselines.

The core operation replaces a sampled cuboid of clip A with the corresponding
voxels of clip B and mixes the labels by the exact surviving voxel fractions.
Fractions are integer voxel counts divided by the total count, so label mass
is conserved to float64 rounding regardless of clamping.

Batch mixing pairs items through uniform random permutations, gates the whole
batch on a single probability draw, and gives every item its own RNG lane so
items can be processed concurrently without changing any output.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Sequence, Union

import numpy as np

from .clips import BatchItem, ClipBatch, SoftLabel, VideoClip
from .errors import (
    BatchTooSmall,
    LabelDimMismatch,
    MaskTooLarge,
    ShapeMismatch,
    ValueOutOfRange,
)
from .rng import BATCH_LANE, RngStream
from .sampler import (
    CuboidCoords,
    MixVariant,
    sample_cuboid,
    sample_lambda,
    sample_spatial_cuboid,
)

Coords = Union[CuboidCoords, tuple[CuboidCoords, ...]]


@dataclass(frozen=True)
class MixRecipe:
    """Everything needed to replay or audit one mix.

    ``coords`` is a single cuboid for the pairwise variants, a tuple of one
    cuboid per donor for multi-video mixes, and a tuple of one cuboid per
    frame for the per-frame variant. ``lambda_sampled`` follows the same
    shape rule (tuple of per-paste draws for multi-video). ``keep_fraction``
    is the exact fraction of voxels still owned by the primary clip.
    ``donor_ids`` lists the primary id followed by donor ids when known
    (batch mixing); it is empty for anonymous pair calls.
    """

    variant: MixVariant
    alpha: float
    lambda_sampled: Union[float, tuple[float, ...]]
    coords: Coords
    keep_fraction: float
    donor_ids: tuple[str, ...]
    rng_path: tuple[int, int, int, int]


class MixedItem(NamedTuple):
    id: str
    clip: VideoClip
    label: SoftLabel
    recipe: Optional[MixRecipe]


@dataclass(frozen=True)
class MixedBatch:
    """Output of batch mixing; shape-homogeneous like the input batch."""

    items: tuple[MixedItem, ...]

    def __post_init__(self):
        items = tuple(MixedItem(*it) for it in self.items)
        if not items:
            raise ShapeMismatch("mixed batch must be nonempty")
        shape = items[0].clip.shape
        for it in items:
            if it.clip.shape != shape:
                raise ShapeMismatch(
                    f"clip {it.id!r} has shape {it.clip.shape}, batch shape is {shape}"
                )
        object.__setattr__(self, "items", items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[MixedItem]:
        return iter(self.items)

    def __getitem__(self, i: int) -> MixedItem:
        return self.items[i]

    def stacked(self) -> np.ndarray:
        return np.stack([it.clip.data for it in self.items])

    def labels(self) -> np.ndarray:
        return np.stack([it.label.masses for it in self.items])


def _check_pair(xA: VideoClip, yA: SoftLabel, xB: VideoClip, yB: SoftLabel) -> None:
    if xA.shape != xB.shape:
        raise ShapeMismatch(f"clip shapes differ: {xA.shape} vs {xB.shape}")
    if yA.k != yB.k:
        raise LabelDimMismatch(f"label sizes differ: {yA.k} vs {yB.k}")


def _mix_label(weights: np.ndarray, labels: Sequence[np.ndarray]) -> SoftLabel:
    # Accumulate in source order; weights are exact voxel-count ratios.
    mixed = np.zeros(labels[0].size, dtype=np.float64)
    for w, masses in zip(weights, labels):
        mixed += w * masses
    return SoftLabel(mixed)


def _count_weights(counts: Sequence[int], total: int) -> np.ndarray:
    return np.asarray(counts, dtype=np.float64) / float(total)


def videomix_pair(
    xA: VideoClip,
    yA: SoftLabel,
    xB: VideoClip,
    yB: SoftLabel,
    variant: MixVariant,
    alpha: float,
    rng: RngStream,
) -> tuple[VideoClip, SoftLabel, MixRecipe]:
    """Replace one sampled cuboid of xA with xB's voxels; mix labels exactly.

    Label weights are the exact post-clamp voxel fractions, not the sampled
    lambda. The per-frame variant delegates to :func:`perframe_videomix`.
    """
    if variant is MixVariant.PERFRAME:
        return perframe_videomix(xA, yA, xB, yB, alpha, rng)
    _check_pair(xA, yA, xB, yB)
    path = rng.path
    t, h, w, _ = xA.shape
    lam = sample_lambda(alpha, rng)
    coords = sample_cuboid(variant, lam, t, h, w, rng)

    out = np.array(xA.data)
    region = (slice(coords.t1, coords.t2), slice(coords.h1, coords.h2),
              slice(coords.w1, coords.w2))
    out[region] = xB.data[region]

    total = t * h * w
    weights = _count_weights([total - coords.volume, coords.volume], total)
    label = _mix_label(weights, [yA.masses, yB.masses])
    recipe = MixRecipe(
        variant=variant,
        alpha=alpha,
        lambda_sampled=lam,
        coords=coords,
        keep_fraction=float(weights[0]),
        donor_ids=(),
        rng_path=path,
    )
    return VideoClip(out), label, recipe


def perframe_videomix(
    xA: VideoClip,
    yA: SoftLabel,
    xB: VideoClip,
    yB: SoftLabel,
    alpha: float,
    rng: RngStream,
) -> tuple[VideoClip, SoftLabel, MixRecipe]:
    """One lambda, an independently centered spatial box in every frame."""
    _check_pair(xA, yA, xB, yB)
    path = rng.path
    t, h, w, _ = xA.shape
    lam = sample_lambda(alpha, rng)

    out = np.array(xA.data)
    frame_coords = []
    cut_count = 0
    for ti in range(t):
        box = sample_spatial_cuboid(lam, 1, h, w, rng)
        coords = CuboidCoords(ti, ti + 1, box.h1, box.h2, box.w1, box.w2)
        out[ti, coords.h1:coords.h2, coords.w1:coords.w2] = \
            xB.data[ti, coords.h1:coords.h2, coords.w1:coords.w2]
        cut_count += coords.volume
        frame_coords.append(coords)

    total = t * h * w
    weights = _count_weights([total - cut_count, cut_count], total)
    label = _mix_label(weights, [yA.masses, yB.masses])
    recipe = MixRecipe(
        variant=MixVariant.PERFRAME,
        alpha=alpha,
        lambda_sampled=lam,
        coords=tuple(frame_coords),
        keep_fraction=float(weights[0]),
        donor_ids=(),
        rng_path=path,
    )
    return VideoClip(out), label, recipe


def _mix_item_multi(
    primary: BatchItem,
    donors: Sequence[BatchItem],
    variant: MixVariant,
    alpha: float,
    rng: RngStream,
) -> MixedItem:
    """Sequential paste of one cuboid per donor with exact ownership labels."""
    path = rng.path
    t, h, w, _ = primary.clip.shape
    total = t * h * w

    out = np.array(primary.clip.data)
    lams = []
    coords_list = []
    if len(donors) == 1:
        lam = sample_lambda(alpha, rng)
        coords = sample_cuboid(variant, lam, t, h, w, rng)
        region = (slice(coords.t1, coords.t2), slice(coords.h1, coords.h2),
                  slice(coords.w1, coords.w2))
        out[region] = donors[0].clip.data[region]
        lams.append(lam)
        coords_list.append(coords)
        counts = [total - coords.volume, coords.volume]
    else:
        # Later pastes overwrite earlier ones; the owner map records, per
        # voxel, which source wrote it last (0 = primary).
        owner = np.zeros((t, h, w), dtype=np.int64)
        for j, donor in enumerate(donors, start=1):
            lam = sample_lambda(alpha, rng)
            coords = sample_cuboid(variant, lam, t, h, w, rng)
            region = (slice(coords.t1, coords.t2), slice(coords.h1, coords.h2),
                      slice(coords.w1, coords.w2))
            out[region] = donor.clip.data[region]
            owner[region] = j
            lams.append(lam)
            coords_list.append(coords)
        counts = np.bincount(owner.ravel(), minlength=len(donors) + 1).tolist()

    weights = _count_weights(counts, total)
    label = _mix_label(weights, [primary.label.masses] + [d.label.masses for d in donors])
    recipe = MixRecipe(
        variant=variant,
        alpha=alpha,
        lambda_sampled=lams[0] if len(lams) == 1 else tuple(lams),
        coords=coords_list[0] if len(coords_list) == 1 else tuple(coords_list),
        keep_fraction=float(weights[0]),
        donor_ids=(primary.id,) + tuple(d.id for d in donors),
        rng_path=path,
    )
    return MixedItem(primary.id, VideoClip(out), label, recipe)


def _mix_item_perframe(
    primary: BatchItem,
    donor: BatchItem,
    alpha: float,
    rng: RngStream,
) -> MixedItem:
    clip, label, recipe = perframe_videomix(
        primary.clip, primary.label, donor.clip, donor.label, alpha, rng,
    )
    recipe = MixRecipe(
        variant=recipe.variant,
        alpha=recipe.alpha,
        lambda_sampled=recipe.lambda_sampled,
        coords=recipe.coords,
        keep_fraction=recipe.keep_fraction,
        donor_ids=(primary.id, donor.id),
        rng_path=recipe.rng_path,
    )
    return MixedItem(primary.id, clip, label, recipe)


def videomix_batch(
    batch: ClipBatch,
    variant: MixVariant,
    alpha: float,
    prob: float,
    n_videos: int,
    rng: RngStream,
    *,
    max_workers: Optional[int] = None,
) -> MixedBatch:
    """Mix a whole batch, or pass it through, on a single probability draw.

    Pairings come from ``n_videos - 1`` uniform random permutations drawn on
    the batch lane; item i is mixed with the items at ``perm[i]`` for each
    permutation, pasted sequentially. Each item consumes only its own RNG
    lane, so ``max_workers`` changes wall time, never values.
    """
    if not 0.0 <= prob <= 1.0:
        raise ValueOutOfRange(f"prob must be in [0,1], got {prob}")
    if n_videos not in (2, 3, 4):
        raise ValueOutOfRange(f"n_videos must be 2, 3, or 4, got {n_videos}")
    if variant is MixVariant.PERFRAME and n_videos != 2:
        raise ValueOutOfRange("per-frame mixing is defined for n_videos=2 only")
    if prob > 0.0 and len(batch) < 2:
        raise BatchTooSmall(f"mixing needs >= 2 items, batch has {len(batch)}")

    if prob > 0.0:
        batch_rng = rng.spawn(sample=BATCH_LANE)
        applied = batch_rng.uniform() < prob
    else:
        applied = False
    if not applied:
        items = tuple(MixedItem(it.id, it.clip, it.label, None) for it in batch)
        return MixedBatch(items)

    n = len(batch)
    perms = [batch_rng.permutation(n) for _ in range(n_videos - 1)]

    def mix_one(i: int) -> MixedItem:
        item_rng = rng.spawn(sample=i)
        donors = [batch[p[i]] for p in perms]
        if variant is MixVariant.PERFRAME:
            return _mix_item_perframe(batch[i], donors[0], alpha, item_rng)
        return _mix_item_multi(batch[i], donors, variant, alpha, item_rng)

    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            items = tuple(pool.map(mix_one, range(n)))
    else:
        items = tuple(mix_one(i) for i in range(n))
    return MixedBatch(items)


def recipe_record(recipe: MixRecipe) -> dict:
    """Plain JSON-ready rendering of a recipe (sidecar / audit format)."""
    coords = recipe.coords
    if isinstance(coords, CuboidCoords):
        coords_value = list(coords.as_tuple())
    else:
        coords_value = [list(c.as_tuple()) for c in coords]
    lam = recipe.lambda_sampled
    return {
        "variant": recipe.variant.value,
        "alpha": recipe.alpha,
        "lambda_sampled": lam if isinstance(lam, float) else list(lam),
        "coords": coords_value,
        "keep_fraction": recipe.keep_fraction,
        "donor_ids": list(recipe.donor_ids),
        "rng_path": list(recipe.rng_path),
    }


def mixup_video(
    xA: VideoClip,
    yA: SoftLabel,
    xB: VideoClip,
    yB: SoftLabel,
    alpha: float,
    rng: RngStream,
) -> tuple[VideoClip, SoftLabel]:
    """Elementwise convex blend of two clips and their labels."""
    _check_pair(xA, yA, xB, yB)
    lam = sample_lambda(alpha, rng)
    # Blend in float64 so the float32 cast absorbs the convexity rounding.
    blended = lam * xA.data.astype(np.float64) + (1.0 - lam) * xB.data.astype(np.float64)
    label = _mix_label(np.array([lam, 1.0 - lam]), [yA.masses, yB.masses])
    return VideoClip(blended.astype(np.float32)), label


def cutout_video(x: VideoClip, mask_side: int, rng: RngStream) -> VideoClip:
    """Zero a uniformly centered, edge-clamped square in every frame.

    The label is untouched by construction: cutout removes signal without
    mixing classes, so callers keep their original label.
    """
    if mask_side < 0:
        raise ValueOutOfRange(f"mask_side must be >= 0, got {mask_side}")
    if mask_side > min(x.height, x.width):
        raise MaskTooLarge(
            f"mask_side {mask_side} exceeds min(H,W) = {min(x.height, x.width)}"
        )
    wc = rng.uniform() * x.width
    hc = rng.uniform() * x.height
    w1 = max(0, min(round(wc - mask_side / 2.0), x.width))
    w2 = max(0, min(round(wc + mask_side / 2.0), x.width))
    h1 = max(0, min(round(hc - mask_side / 2.0), x.height))
    h2 = max(0, min(round(hc + mask_side / 2.0), x.height))
    out = np.array(x.data)
    out[:, h1:h2, w1:w2, :] = 0.0
    return VideoClip(out)
