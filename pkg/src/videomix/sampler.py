"""Mix-ratio and cuboid samplers with exact-fraction accounting.

The mix ratio lambda comes from Beta(alpha, alpha); cuboid endpoints are
derived from a uniform center and a side length chosen so the pre-clamp
volume fraction equals lambda (per-axis side = dim * lambda^(1/n_axes)).
Endpoints round to nearest and clamp to [0, dim]; intervals are half-open.
After clamping, the exact voxel fraction replaces the sampled lambda, so
label mixing is always volume-true.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import CoordsOutOfRange, NonPositiveAlpha
from .rng import RngStream


class MixVariant(enum.Enum):
    SPATIAL = "spatial"
    TEMPORAL = "temporal"
    SPATIOTEMPORAL = "st"
    PERFRAME = "perframe"

    @classmethod
    def from_string(cls, name: str) -> "MixVariant":
        for variant in cls:
            if variant.value == name:
                return variant
        valid = ", ".join(v.value for v in cls)
        raise ValueError(f"unknown variant {name!r}; valid choices: {valid}")


@dataclass(frozen=True)
class CuboidCoords:
    """Half-open integer cuboid [t1,t2) x [h1,h2) x [w1,w2)."""

    t1: int
    t2: int
    h1: int
    h2: int
    w1: int
    w2: int

    def validate(self, t: int, h: int, w: int) -> "CuboidCoords":
        ok = (
            0 <= self.t1 <= self.t2 <= t
            and 0 <= self.h1 <= self.h2 <= h
            and 0 <= self.w1 <= self.w2 <= w
        )
        if not ok:
            raise CoordsOutOfRange(f"{self} out of range for dims (T={t}, H={h}, W={w})")
        return self

    @property
    def volume(self) -> int:
        return (self.t2 - self.t1) * (self.h2 - self.h1) * (self.w2 - self.w1)

    def as_tuple(self) -> tuple[int, int, int, int, int, int]:
        return (self.t1, self.t2, self.h1, self.h2, self.w1, self.w2)


def _clamped_interval(center: float, side: float, dim: int) -> tuple[int, int]:
    lo = round(center - side / 2.0)
    hi = round(center + side / 2.0)
    return max(0, min(lo, dim)), max(0, min(hi, dim))


def _gamma_variate(shape: float, rng: RngStream) -> float:
    # Marsaglia-Tsang; for shape < 1 boost via G(a) = G(a+1) * U^(1/a).
    if shape < 1.0:
        u = rng.uniform()
        return _gamma_variate(shape + 1.0, rng) * u ** (1.0 / shape)
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = rng.normal()
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = rng.uniform()
        if u < 1.0 - 0.0331 * x * x * x * x:
            return d * v
        if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            return d * v


def sample_lambda(alpha: float, rng: RngStream) -> float:
    """Draw the mix ratio from Beta(alpha, alpha).

    alpha = 1 is the uniform distribution and consumes exactly one draw;
    other alphas use the two-gamma-variate ratio construction.
    """
    if alpha <= 0.0:
        raise NonPositiveAlpha(f"alpha must be > 0, got {alpha}")
    if alpha == 1.0:
        return rng.uniform()
    ga = _gamma_variate(alpha, rng)
    gb = _gamma_variate(alpha, rng)
    total = ga + gb
    if total == 0.0:  # double underflow; only reachable at extreme alpha
        return 0.5
    return ga / total


def spatial_cuboid_at(lam: float, t: int, h: int, w: int,
                      wc: float, hc: float) -> CuboidCoords:
    """Spatial box at a given center; pre-clamp area fraction = lam."""
    side = math.sqrt(lam)
    w1, w2 = _clamped_interval(wc, w * side, w)
    h1, h2 = _clamped_interval(hc, h * side, h)
    return CuboidCoords(0, t, h1, h2, w1, w2)


def temporal_cuboid_at(lam: float, t: int, h: int, w: int, tc: float) -> CuboidCoords:
    """Frame interval at a given center; pre-clamp length t*lam."""
    t1, t2 = _clamped_interval(tc, t * lam, t)
    return CuboidCoords(t1, t2, 0, h, 0, w)


def st_cuboid_at(lam: float, t: int, h: int, w: int,
                 tc: float, hc: float, wc: float) -> CuboidCoords:
    """Free 3-D box at given centers; each axis side = dim * lam^(1/3)."""
    side = lam ** (1.0 / 3.0)
    w1, w2 = _clamped_interval(wc, w * side, w)
    h1, h2 = _clamped_interval(hc, h * side, h)
    t1, t2 = _clamped_interval(tc, t * side, t)
    return CuboidCoords(t1, t2, h1, h2, w1, w2)


def sample_spatial_cuboid(lam: float, t: int, h: int, w: int, rng: RngStream) -> CuboidCoords:
    """Spatial box across all frames at a uniform center (draws wc, hc)."""
    wc = rng.uniform() * w
    hc = rng.uniform() * h
    return spatial_cuboid_at(lam, t, h, w, wc, hc)


def sample_temporal_cuboid(lam: float, t: int, h: int, w: int, rng: RngStream) -> CuboidCoords:
    """Frame interval spanning the full spatial extent (draws tc)."""
    tc = rng.uniform() * t
    return temporal_cuboid_at(lam, t, h, w, tc)


def sample_st_cuboid(lam: float, t: int, h: int, w: int, rng: RngStream) -> CuboidCoords:
    """Free 3-D box with independent uniform centers (draws wc, hc, tc)."""
    wc = rng.uniform() * w
    hc = rng.uniform() * h
    tc = rng.uniform() * t
    return st_cuboid_at(lam, t, h, w, tc, hc, wc)


_SAMPLERS = {
    MixVariant.SPATIAL: sample_spatial_cuboid,
    MixVariant.TEMPORAL: sample_temporal_cuboid,
    MixVariant.SPATIOTEMPORAL: sample_st_cuboid,
}


def sample_cuboid(variant: MixVariant, lam: float, t: int, h: int, w: int,
                  rng: RngStream) -> CuboidCoords:
    """Dispatch to the variant's cuboid sampler (PERFRAME has no single cuboid)."""
    try:
        fn = _SAMPLERS[variant]
    except KeyError:
        raise ValueError(f"variant {variant} does not sample a single cuboid") from None
    return fn(lam, t, h, w, rng)


def exact_fraction(coords: CuboidCoords, t: int, h: int, w: int) -> float:
    """Voxel fraction of the cuboid: volume / (T*H*W), exact integer ratio."""
    coords.validate(t, h, w)
    return coords.volume / (t * h * w)


def build_mask(coords: CuboidCoords, t: int, h: int, w: int) -> np.ndarray:
    """(T, H, W) uint8 indicator of the cuboid; mean equals exact_fraction."""
    coords.validate(t, h, w)
    mask = np.zeros((t, h, w), dtype=np.uint8)
    mask[coords.t1:coords.t2, coords.h1:coords.h2, coords.w1:coords.w2] = 1
    return mask
