"""Synthetic bias dataset, pooled-linear model, trainer, and evaluation."""

import math

import numpy as np
import pytest

from oracles import finite_diff_grad, label_mix_oracle, softmax_oracle, soft_ce_oracle
from videomix.clip_pipeline import ViewSpec
from videomix.clips import BatchItem, ClipBatch, SoftLabel, VideoClip
from videomix.errors import DimMismatch, Diverged, SpecInfeasible, ValueOutOfRange
from videomix.rng import RngStream
from videomix.toylab import (
    Metrics,
    SyntheticSpec,
    ToyModel,
    TrainConfig,
    config_with_aug,
    evaluate,
    gen_biased_dataset,
    parse_experiment_config,
    pooled_dim,
    pooled_features,
    run_experiment,
    soft_ce_loss,
    batch_loss_grads,
    train,
)

TINY = SyntheticSpec(clips_per_class=6, seed=0)


def _tiny_data():
    return gen_biased_dataset(TINY)


# --- loss -------------------------------------------------------------------


def test_loss_uniform_logits_is_log_k():
    for k in (2, 4, 7):
        loss, _ = soft_ce_loss(np.zeros(k), SoftLabel.one_hot(0, k))
        assert loss == pytest.approx(math.log(k), abs=1e-12)


def test_loss_affine_in_label():
    rng = np.random.default_rng(0)
    z = rng.normal(size=5)
    ya = SoftLabel.one_hot(1, 5)
    yb = SoftLabel.one_hot(3, 5)
    lam = 0.3
    mixed = SoftLabel(label_mix_oracle([lam, 1 - lam], [ya.masses, yb.masses]))
    la, _ = soft_ce_loss(z, ya)
    lb, _ = soft_ce_loss(z, yb)
    lm, _ = soft_ce_loss(z, mixed)
    assert lm == pytest.approx(lam * la + (1 - lam) * lb, abs=1e-12)


def test_loss_matches_oracle_and_grad_is_p_minus_y():
    rng = np.random.default_rng(1)
    z = rng.normal(size=4) * 3
    y = SoftLabel(np.array([0.2, 0.1, 0.4, 0.3]))
    loss, grad = soft_ce_loss(z, y)
    assert loss == pytest.approx(soft_ce_oracle(z, y.masses), abs=1e-12)
    assert np.allclose(grad, softmax_oracle(z) - y.masses, atol=1e-12)


def test_batch_gradients_match_finite_differences():
    rng = np.random.default_rng(2)
    k, f, n = 3, 8, 5
    feats = rng.normal(size=(n, f))
    labels = np.stack([SoftLabel.one_hot(int(c), k).masses
                       for c in rng.integers(0, k, n)])

    for trial in range(10):
        flat0 = rng.normal(size=k * f + k)

        def loss_at(flat):
            model = ToyModel(flat[:k * f].reshape(k, f), flat[k * f:])
            return batch_loss_grads(model, feats, labels)[0]

        model = ToyModel(flat0[:k * f].reshape(k, f), flat0[k * f:])
        _, grad_w, grad_b = batch_loss_grads(model, feats, labels)
        analytic = np.concatenate([grad_w.ravel(), grad_b])
        numeric = finite_diff_grad(loss_at, flat0)
        denom = max(float(np.linalg.norm(numeric)), 1e-12)
        assert float(np.linalg.norm(analytic - numeric)) / denom < 1e-4


# --- dataset ----------------------------------------------------------------


def test_dataset_shapes_labels_and_determinism():
    train_a, test_a = _tiny_data()
    train_b, test_b = _tiny_data()
    assert len(train_a) == len(test_a) == 4 * 6
    assert train_a.shape == (8, 32, 32, 3)
    assert train_a.stacked().tobytes() == train_b.stacked().tobytes()
    assert test_a.stacked().tobytes() == test_b.stacked().tobytes()
    assert [it.id for it in train_a][:2] == ["train-0000", "train-0001"]
    for cls in range(4):
        for it in list(train_a)[cls * 6:(cls + 1) * 6]:
            assert int(np.argmax(it.label.masses)) == cls


def _recover_bg_class(clip: VideoClip, k: int) -> int:
    # With zero pixel noise the background is exactly (bg+1)/(k+1) and the
    # sprite is 1.0, so the clip minimum identifies the background level.
    level = float(clip.data.min())
    return round(level * (k + 1)) - 1


def test_background_agreement_tracks_bias():
    spec = SyntheticSpec(clips_per_class=500, bias=0.25, noise=0.0, seed=3)
    train_batch, _ = gen_biased_dataset(spec)
    agree = np.mean([
        _recover_bg_class(it.clip, 4) == int(np.argmax(it.label.masses))
        for it in train_batch
    ])
    assert 0.25 - 0.03 <= agree <= 0.25 + 0.03

    spec = SyntheticSpec(clips_per_class=200, bias=0.9, noise=0.0, seed=4)
    train_batch, _ = gen_biased_dataset(spec)
    agree = np.mean([
        _recover_bg_class(it.clip, 4) == int(np.argmax(it.label.masses))
        for it in train_batch
    ])
    assert 0.9 - 0.03 <= agree <= 0.9 + 0.03


def test_test_split_background_is_roughly_uniform():
    spec = SyntheticSpec(clips_per_class=500, bias=0.9, noise=0.0, seed=5)
    _, test_batch = gen_biased_dataset(spec)
    agree = np.mean([
        _recover_bg_class(it.clip, 4) == int(np.argmax(it.label.masses))
        for it in test_batch
    ])
    assert 0.25 - 0.03 <= agree <= 0.25 + 0.03


def test_spec_validation():
    with pytest.raises(ValueOutOfRange):
        SyntheticSpec(k=1)
    with pytest.raises(ValueOutOfRange):
        SyntheticSpec(bias=1.5)
    with pytest.raises(SpecInfeasible):
        SyntheticSpec(t=12)  # sprite travel would leave the frame


def test_pixel_range_respected():
    train_batch, _ = gen_biased_dataset(SyntheticSpec(clips_per_class=2, noise=0.3))
    for it in train_batch:
        it.clip.validate_pixel_range()


# --- pooling ----------------------------------------------------------------


def test_pooled_features_match_block_means():
    rng = np.random.default_rng(6)
    stacked = rng.random((2, 4, 8, 8, 3)).astype(np.float32)
    feats = pooled_features(stacked)
    assert feats.shape == (2, pooled_dim(4, 8, 8))
    n_idx, ti, hi, wi = 1, 1, 0, 1
    block = stacked[n_idx, 2 * ti:2 * ti + 2, 4 * hi:4 * hi + 4, 4 * wi:4 * wi + 4, :]
    flat = ti * 4 + hi * 2 + wi
    assert feats[n_idx, flat] == pytest.approx(float(block.astype(np.float64).mean()),
                                               abs=1e-12)


def test_pooled_features_reject_indivisible_dims():
    with pytest.raises(DimMismatch):
        pooled_features(np.zeros((1, 3, 8, 8, 1), dtype=np.float32))


# --- training ---------------------------------------------------------------


def test_train_lr_zero_keeps_weights():
    train_batch, test_batch = _tiny_data()
    model = ToyModel.zeros(4, pooled_dim(8, 32, 32))
    cfg = TrainConfig(epochs=3, lr=0.0)
    out, metrics = train(model, train_batch, cfg, val=test_batch)
    assert np.array_equal(out.weights, model.weights)
    assert np.array_equal(out.bias, model.bias)
    assert len(metrics.train_loss) == len(metrics.val_loss) == len(metrics.val_top1) == 3


def test_train_deterministic_metrics():
    train_batch, test_batch = _tiny_data()
    cfg = TrainConfig(epochs=3, aug="videomix-spatial", seed=11)
    runs = []
    for _ in range(2):
        model = ToyModel.zeros(4, pooled_dim(8, 32, 32))
        _, metrics = train(model, train_batch, cfg, val=test_batch)
        runs.append(metrics)
    assert runs[0] == runs[1]


def test_train_loss_strictly_decreases_on_separable_data():
    # Unbiased backgrounds (bias = 1/K) leave motion as the only consistent
    # cue; full-batch descent at lr=0.1 must make monotone progress on the
    # convex objective for the first five epochs.
    spec = SyntheticSpec(clips_per_class=30, bias=0.25, noise=0.02, seed=7)
    train_batch, test_batch = gen_biased_dataset(spec)
    model = ToyModel.zeros(4, pooled_dim(8, 32, 32))
    cfg = TrainConfig(epochs=5, lr=0.1, batch_size=len(train_batch))
    _, metrics = train(model, train_batch, cfg, val=test_batch)
    losses = metrics.train_loss
    assert all(losses[e + 1] < losses[e] for e in range(4))


def test_train_diverges_cleanly_at_huge_lr():
    train_batch, test_batch = _tiny_data()
    model = ToyModel.zeros(4, pooled_dim(8, 32, 32))
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(Diverged):
            train(model, train_batch, TrainConfig(epochs=2, lr=1e307), val=test_batch)


def test_bias_one_no_noise_shortcut_is_learnable():
    # The comparison between augmentations is only meaningful if the
    # background shortcut alone can ace biased training data.  Full-batch
    # descent at a stable step size converges on this convex problem.
    spec = SyntheticSpec(clips_per_class=25, bias=1.0, noise=0.0, seed=9)
    train_batch, test_batch = gen_biased_dataset(spec)
    model = ToyModel.zeros(4, pooled_dim(8, 32, 32))
    cfg = TrainConfig(epochs=1000, lr=0.03, batch_size=len(train_batch))
    model, _ = train(model, train_batch, cfg, val=test_batch)
    assert evaluate(model, train_batch) >= 0.99


def test_videomix_prob_zero_equals_no_augmentation():
    train_batch, test_batch = _tiny_data()
    outs = []
    for aug in ("none", "videomix-spatial"):
        model = ToyModel.zeros(4, pooled_dim(8, 32, 32))
        cfg = TrainConfig(epochs=2, aug=aug, prob=0.0)
        _, metrics = train(model, train_batch, cfg, val=test_batch)
        outs.append(metrics)
    assert outs[0] == outs[1]


@pytest.mark.parametrize("aug", ["mixup", "cutout", "videomix-temporal",
                                 "videomix-st", "videomix-perframe"])
def test_all_augmentation_paths_train(aug):
    train_batch, test_batch = _tiny_data()
    model = ToyModel.zeros(4, pooled_dim(8, 32, 32))
    cfg = TrainConfig(epochs=2, aug=aug, cutout_side=8)
    _, metrics = train(model, train_batch, cfg, val=test_batch)
    assert all(np.isfinite(metrics.train_loss))


def test_train_config_validation():
    with pytest.raises(ValueOutOfRange):
        TrainConfig(epochs=0)
    with pytest.raises(ValueOutOfRange):
        TrainConfig(lr=-0.1)
    with pytest.raises(ValueOutOfRange):
        TrainConfig(aug="cutmix-3d")


# --- evaluation -------------------------------------------------------------


def _single_class_batch(cls=0, n=5, k=4):
    rng = np.random.default_rng(10)
    items = [
        BatchItem(f"c{i}", VideoClip(rng.random((2, 4, 4, 1), dtype=np.float32)),
                  SoftLabel.one_hot(cls, k))
        for i in range(n)
    ]
    return ClipBatch(tuple(items))


def test_evaluate_constant_logits_tie_break_lowest_index():
    data = _single_class_batch(cls=0)
    model = ToyModel.zeros(4, pooled_dim(2, 4, 4))
    assert evaluate(model, data) == 1.0
    assert evaluate(model, _single_class_batch(cls=2)) == 0.0


def test_evaluate_degenerate_views_equal_single_view():
    train_batch, test_batch = _tiny_data()
    model = ToyModel.zeros(4, pooled_dim(8, 32, 32))
    model, _ = train(model, train_batch, TrainConfig(epochs=2), val=test_batch)
    views = ViewSpec(crop=32, n_temporal=1, n_spatial=1)
    assert evaluate(model, test_batch, views) == evaluate(model, test_batch)


# --- metrics, config text, driver -------------------------------------------


def test_metrics_csv_format_and_lengths():
    metrics = Metrics((1.5, 1.25), (1.75, 1.5), (0.25, 0.5))
    lines = metrics.to_csv().splitlines()
    assert lines[0] == "epoch,train_loss,val_loss,val_top1"
    assert lines[1] == "0,1.5,1.75,0.25"
    assert len(lines) == 3
    with pytest.raises(DimMismatch):
        Metrics((1.0,), (1.0, 2.0), (0.5,))


def test_parse_experiment_config_roundtrip():
    text = """
    # comment line
    k = 4
    clips_per_class = 6   # inline comment
    bias = 0.8
    data_seed = 5
    epochs = 2
    aug = videomix-temporal
    alpha = 0.3
    """
    spec, cfg = parse_experiment_config(text)
    assert spec.clips_per_class == 6 and spec.bias == 0.8 and spec.seed == 5
    assert cfg.epochs == 2 and cfg.aug == "videomix-temporal" and cfg.alpha == 0.3


def test_parse_experiment_config_errors():
    with pytest.raises(ValueOutOfRange, match="line 1"):
        parse_experiment_config("wat")
    with pytest.raises(ValueOutOfRange, match="unknown config key"):
        parse_experiment_config("sprite = 3")
    with pytest.raises(ValueOutOfRange, match="bad value"):
        parse_experiment_config("epochs = soon")


def test_config_with_aug_changes_only_aug():
    cfg = TrainConfig(epochs=7, lr=0.3)
    out = config_with_aug(cfg, "mixup")
    assert out.aug == "mixup" and out.epochs == 7 and out.lr == 0.3


def test_run_experiment_smoke():
    spec = SyntheticSpec(clips_per_class=4, seed=2)
    metrics, top1 = run_experiment(spec, TrainConfig(epochs=2))
    assert len(metrics.val_top1) == 2
    assert 0.0 <= top1 <= 1.0
