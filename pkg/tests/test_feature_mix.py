"""Feature-space temporal mixing, hide-and-seek, and container packing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import balanced_bins_oracle
from videomix.clips import SoftLabel, VideoClip
from videomix.errors import (
    DimZero,
    LabelDimMismatch,
    ShapeMismatch,
    TooManyBins,
    ValueOutOfRange,
)
from videomix.feature_mix import (
    FeatureSequence,
    clip_to_feature,
    feature_to_clip,
    hide_and_seek,
    temporal_featmix,
)
from videomix.mixers import videomix_pair
from videomix.rng import RngStream
from videomix.sampler import MixVariant


def _features(seed, s=10, d=16, k=4, cls=0):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(s, d)).astype(np.float32)
    return FeatureSequence(data, SoftLabel.one_hot(cls, k))


# --- container type -----------------------------------------------------------


def test_feature_sequence_validation():
    with pytest.raises(ShapeMismatch):
        FeatureSequence(np.zeros((2, 2, 2), dtype=np.float32), SoftLabel.one_hot(0, 2))
    with pytest.raises(DimZero):
        FeatureSequence(np.zeros((0, 4), dtype=np.float32), SoftLabel.one_hot(0, 2))
    with pytest.raises(ValueOutOfRange):
        FeatureSequence(np.full((2, 2), np.nan, dtype=np.float32), SoftLabel.one_hot(0, 2))
    f = _features(0)
    assert f.segments == 10 and f.dim == 16
    with pytest.raises(ValueError):
        f.data[0, 0] = 1.0


# --- temporal feature mixing ----------------------------------------------------


def test_featmix_every_row_from_exactly_one_source():
    fA = _features(1, cls=0)
    fB = _features(2, cls=1)
    out, recipe = temporal_featmix(fA, fB, 1.0, RngStream(seed=4))
    c = recipe.coords
    for row in range(10):
        src = fB if c.t1 <= row < c.t2 else fA
        assert out.data[row].tobytes() == src.data[row].tobytes()
    cut = c.t2 - c.t1
    assert recipe.keep_fraction == (10 - cut) / 10
    assert recipe.variant is MixVariant.TEMPORAL


def test_featmix_fixture_cut_3_to_7():
    # A cut of rows [3,7) on S=10 leaves yA exactly 6/10 of the mass.
    fA = _features(3, cls=0)
    fB = _features(4, cls=1)
    hit = None
    for seed in range(500):
        out, recipe = temporal_featmix(fA, fB, 1.0, RngStream(seed=seed))
        if (recipe.coords.t1, recipe.coords.t2) == (3, 7):
            hit = (out, recipe)
            break
    assert hit is not None
    out, recipe = hit
    assert np.array_equal(out.data[3:7], fB.data[3:7])
    assert np.array_equal(out.data[:3], fA.data[:3])
    assert np.array_equal(out.data[7:], fA.data[7:])
    assert out.label.masses[0] == 6 / 10
    assert out.label.masses[1] == 4 / 10


def test_featmix_identical_sources_change_label_only():
    fA = _features(5, cls=0)
    fB = FeatureSequence(fA.data, SoftLabel.one_hot(2, 4))
    out, recipe = temporal_featmix(fA, fB, 1.0, RngStream(seed=9))
    assert out.data.tobytes() == fA.data.tobytes()
    assert out.label.masses[0] == recipe.keep_fraction
    assert out.label.masses[2] == 1.0 - recipe.keep_fraction


def test_featmix_empty_cut_is_identity():
    # Small alpha yields extreme lambdas; find a draw whose clamped interval
    # is empty and check full passthrough.
    fA = _features(6, cls=0)
    fB = _features(7, cls=1)
    for seed in range(500):
        out, recipe = temporal_featmix(fA, fB, 0.05, RngStream(seed=seed))
        if recipe.coords.volume == 0:
            assert out.data.tobytes() == fA.data.tobytes()
            assert out.label.masses.tobytes() == fA.label.masses.tobytes()
            return
    raise AssertionError("no empty cut found in 500 draws at alpha=0.05")


def test_featmix_errors():
    fA = _features(8)
    with pytest.raises(ShapeMismatch):
        temporal_featmix(fA, _features(9, s=12), 1.0, RngStream(seed=0))
    with pytest.raises(LabelDimMismatch):
        temporal_featmix(fA, _features(9, k=5), 1.0, RngStream(seed=0))


def test_featmix_matches_voxel_temporal_path():
    # An (S,1,1,D) clip mixed with the voxel-space temporal variant must be
    # bit-identical to the feature-space mix under the same stream.
    fA = _features(10, cls=0)
    fB = _features(11, cls=3)
    out_f, recipe_f = temporal_featmix(fA, fB, 0.7, RngStream(seed=21))
    clip_out, label_v, recipe_v = videomix_pair(
        feature_to_clip(fA), fA.label, feature_to_clip(fB), fB.label,
        MixVariant.TEMPORAL, 0.7, RngStream(seed=21),
    )
    assert clip_out.data.tobytes() == feature_to_clip(out_f).data.tobytes()
    assert label_v.masses.tobytes() == out_f.label.masses.tobytes()
    assert recipe_v.coords.as_tuple() == recipe_f.coords.as_tuple()
    assert recipe_v.lambda_sampled == recipe_f.lambda_sampled


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**31 - 1),
    s=st.integers(min_value=1, max_value=20),
    alpha=st.floats(min_value=0.1, max_value=4.0, allow_nan=False),
)
def test_featmix_mass_and_fraction_property(seed, s, alpha):
    fA = _features(seed % 97, s=s, d=3, cls=0)
    fB = _features(seed % 97 + 1, s=s, d=3, cls=1)
    out, recipe = temporal_featmix(fA, fB, alpha, RngStream(seed=seed))
    assert abs(float(out.label.masses.sum()) - 1.0) <= 1e-9
    assert 0.0 <= recipe.keep_fraction <= 1.0
    assert recipe.keep_fraction == (s - recipe.coords.volume) / s


# --- hide-and-seek --------------------------------------------------------------


def test_hide_prob_zero_is_identity():
    f = _features(12)
    out = hide_and_seek(f, n_bins=4, hide_prob=0.0, rng=RngStream(seed=0))
    assert out.data.tobytes() == f.data.tobytes()
    assert out.label is f.label


def test_hide_prob_one_zeroes_everything():
    f = _features(13)
    out = hide_and_seek(f, n_bins=4, hide_prob=1.0, rng=RngStream(seed=0))
    assert np.all(out.data == 0.0)


def test_hide_bins_are_contiguous_and_all_or_nothing():
    f = _features(14, s=10)
    _, bounds = balanced_bins_oracle(10, 4)
    for seed in range(30):
        out = hide_and_seek(f, n_bins=4, hide_prob=0.5, rng=RngStream(seed=seed))
        for lo, hi in bounds:
            hidden = np.all(out.data[lo:hi] == 0.0)
            intact = np.array_equal(out.data[lo:hi], f.data[lo:hi])
            assert hidden or intact


def test_hide_mean_fraction_near_half():
    # 10,000 independent trials at hide_prob=0.5 zero about half the rows.
    f = _features(15, s=16, d=4)
    rng = RngStream(seed=77)
    total = 0.0
    for i in range(10_000):
        out = hide_and_seek(f, n_bins=16, hide_prob=0.5, rng=rng.spawn(sample=i))
        total += float(np.mean(np.all(out.data == 0.0, axis=1)))
    assert 0.48 <= total / 10_000 <= 0.52


def test_hide_errors():
    f = _features(16, s=8)
    with pytest.raises(TooManyBins):
        hide_and_seek(f, n_bins=9, hide_prob=0.5, rng=RngStream(seed=0))
    with pytest.raises(TooManyBins):
        hide_and_seek(f, n_bins=0, hide_prob=0.5, rng=RngStream(seed=0))
    with pytest.raises(ValueOutOfRange):
        hide_and_seek(f, n_bins=4, hide_prob=1.5, rng=RngStream(seed=0))


# --- container packing -----------------------------------------------------------


def test_feature_clip_roundtrip():
    f = _features(17, s=6, d=5)
    clip = feature_to_clip(f)
    assert clip.shape == (6, 1, 1, 5)
    back = clip_to_feature(clip, f.label)
    assert back.data.tobytes() == f.data.tobytes()
    assert back.label is f.label


def test_clip_to_feature_requires_unit_spatial_dims():
    clip = VideoClip(np.zeros((4, 2, 1, 3), dtype=np.float32))
    with pytest.raises(ShapeMismatch):
        clip_to_feature(clip, SoftLabel.one_hot(0, 2))
