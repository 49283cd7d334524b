"""Training-clip sampling, evaluation views, and standard spatial augmentation.

All spatial transform parameters are sampled once per clip and applied to
every frame, so augmented clips stay temporally consistent. Evaluation views
are fully deterministic: offsets are evenly spaced with the first at 0 and
the last flush with the far edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .clips import VideoClip
from .errors import (
    CropTooLarge,
    DegenerateScaleRange,
    SpecInfeasible,
    TooFewFrames,
)
from .rng import RngStream


@dataclass(frozen=True)
class ClipSpec:
    """Temporal sampling plan: a window of frames, T picks at stride tau."""

    t: int
    tau: int
    window: int = 64

    def __post_init__(self):
        if self.window < 1 or self.t < 1 or self.tau < 1:
            raise SpecInfeasible(
                f"window, T, tau must be >= 1, got ({self.window}, {self.t}, {self.tau})"
            )
        if (self.t - 1) * self.tau >= self.window:
            raise SpecInfeasible(
                f"(T-1)*tau = {(self.t - 1) * self.tau} must be < window {self.window}"
            )


@dataclass(frozen=True)
class ViewSpec:
    """Evaluation-view plan: temporal windows x square spatial crops.

    ``window`` is the frame count of each temporal view; None means the full
    video (spatial-only ensembling).
    """

    crop: int
    n_temporal: int = 10
    n_spatial: int = 3
    window: Optional[int] = None

    def __post_init__(self):
        if self.n_temporal < 1 or self.n_spatial < 1:
            raise SpecInfeasible(
                f"view counts must be >= 1, got ({self.n_temporal}, {self.n_spatial})"
            )
        if self.crop < 1:
            raise SpecInfeasible(f"crop side must be >= 1, got {self.crop}")
        if self.window is not None and self.window < 1:
            raise SpecInfeasible(f"window must be >= 1, got {self.window}")


def sample_training_clip(video: VideoClip, spec: ClipSpec, rng: RngStream) -> VideoClip:
    """Pick a random window, then frames at stride tau inside it.

    Videos shorter than the window are looped cyclically to window length
    before sampling, so every video yields exactly T frames.
    """
    n = video.frames
    if n >= spec.window:
        start = rng.randint_below(n - spec.window + 1)
        idx = start + spec.tau * np.arange(spec.t)
    else:
        idx = (spec.tau * np.arange(spec.t)) % n
    return VideoClip(video.data[idx])


def jittered_bin_sample(video: VideoClip, t: int, rng: RngStream) -> VideoClip:
    """One uniformly chosen frame from each of t near-equal contiguous bins."""
    n = video.frames
    if n < t:
        raise TooFewFrames(f"video has {n} frames, need at least {t}")
    base, rem = divmod(n, t)
    idx = []
    start = 0
    for b in range(t):
        size = base + (1 if b < rem else 0)
        idx.append(start + rng.randint_below(size))
        start += size
    return VideoClip(video.data[np.array(idx)])


def _even_offsets(extent: int, n: int) -> list[int]:
    # First at 0, last flush with the far edge; n=1 means centered.
    if n == 1:
        return [extent // 2]
    return [round(k * extent / (n - 1)) for k in range(n)]


def multiview_crops(video: VideoClip, spec: ViewSpec) -> list[VideoClip]:
    """Deterministic n_temporal x n_spatial evaluation views, temporal-major.

    Spatial crops slide along the longer side (centered on the shorter one);
    temporal windows slide along the frame axis.
    """
    t, h, w = video.frames, video.height, video.width
    if spec.crop > min(h, w):
        raise CropTooLarge(f"crop {spec.crop} exceeds min(H,W) = {min(h, w)}")
    window = t if spec.window is None else spec.window
    if window > t:
        raise SpecInfeasible(f"view window {window} exceeds video length {t}")

    starts = _even_offsets(t - window, spec.n_temporal)
    if w >= h:
        xs = _even_offsets(w - spec.crop, spec.n_spatial)
        ys = [(h - spec.crop) // 2] * spec.n_spatial
    else:
        ys = _even_offsets(h - spec.crop, spec.n_spatial)
        xs = [(w - spec.crop) // 2] * spec.n_spatial

    views = []
    for s in starts:
        frames = video.data[s:s + window]
        for y, x in zip(ys, xs):
            views.append(VideoClip(frames[:, y:y + spec.crop, x:x + spec.crop, :]))
    return views


def hflip(clip: VideoClip) -> VideoClip:
    """Mirror the width axis of every frame (an involution)."""
    return VideoClip(clip.data[:, :, ::-1, :])


def _resize_bilinear(frames: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with half-pixel-center alignment, per frame."""
    t, h, w, c = frames.shape
    if (out_h, out_w) == (h, w):
        return frames

    def axis_coords(out_dim: int, in_dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src = (np.arange(out_dim, dtype=np.float64) + 0.5) * (in_dim / out_dim) - 0.5
        lo = np.clip(np.floor(src).astype(np.int64), 0, in_dim - 1)
        hi = np.clip(lo + 1, 0, in_dim - 1)
        frac = np.clip(src - lo, 0.0, 1.0)
        return lo, hi, frac

    y0, y1, fy = axis_coords(out_h, h)
    x0, x1, fx = axis_coords(out_w, w)
    fy = fy[None, :, None, None]
    fx = fx[None, None, :, None]
    a = frames[:, y0][:, :, x0].astype(np.float64)
    b = frames[:, y0][:, :, x1].astype(np.float64)
    cc = frames[:, y1][:, :, x0].astype(np.float64)
    d = frames[:, y1][:, :, x1].astype(np.float64)
    top = a * (1.0 - fx) + b * fx
    bot = cc * (1.0 - fx) + d * fx
    return (top * (1.0 - fy) + bot * fy).astype(np.float32)


def standard_augment(
    clip: VideoClip,
    scale_range: tuple[float, float],
    out_side: int,
    flip: bool,
    rng: RngStream,
) -> VideoClip:
    """Random resize crop plus optional horizontal flip, constant along T.

    One scale draw resizes the short side to round(out_side * scale) (never
    below out_side so the crop always fits), one (y, x) draw places the
    square crop, and when ``flip`` is set a final draw mirrors the whole
    clip with probability 1/2.
    """
    lo, hi = scale_range
    if not (0.0 < lo <= hi):
        raise DegenerateScaleRange(f"scale range must satisfy 0 < lo <= hi, got {scale_range}")
    if out_side < 1 or out_side > min(clip.height, clip.width):
        raise CropTooLarge(
            f"out_side {out_side} not in [1, min(H,W)={min(clip.height, clip.width)}]"
        )

    scale = lo + rng.uniform() * (hi - lo)
    short = min(clip.height, clip.width)
    new_short = max(out_side, round(out_side * scale))
    factor = new_short / short
    new_h = max(out_side, round(clip.height * factor))
    new_w = max(out_side, round(clip.width * factor))

    frames = _resize_bilinear(clip.data, new_h, new_w)
    y = rng.randint_below(new_h - out_side + 1)
    x = rng.randint_below(new_w - out_side + 1)
    out = frames[:, y:y + out_side, x:x + out_side, :]
    if flip and rng.uniform() < 0.5:
        out = out[:, :, ::-1, :]
    return VideoClip(out)
