"""Desk-scale scene-bias experiment: data generator, linear model, trainer.

The synthetic task has one motion direction per class (a bright sprite
sweeping across the frame) plus a gray background whose brightness encodes a
class index. During training the background agrees with the true class with
probability ``bias``; at test time it is uniform. A model that leans on the
background shortcut aces biased training data and fails the unbiased test
set, which is exactly the failure mode mixing augmentations are supposed to
reduce: mixed backgrounds land on intermediate brightness levels that no
longer match the mixed labels, while the motion cue keeps paying off in
proportion to its surviving voxels.

The classifier is a pooled-linear model (channel mean, then 2x4x4 block
averages, then one linear layer) trained with soft-label cross-entropy by
mini-batch gradient descent. Everything is deterministic given the seeds.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .clip_pipeline import ViewSpec, multiview_crops
from .clips import BatchItem, ClipBatch, SoftLabel, VideoClip
from .errors import DimMismatch, Diverged, SpecInfeasible, ValueOutOfRange
from .mixers import cutout_video, mixup_video, videomix_batch
from .rng import BATCH_LANE, RngStream
from .sampler import MixVariant

POOL_T = 2
POOL_H = 4
POOL_W = 4

SPRITE_SIDE = 6
SPRITE_STEP = 3

AUG_CHOICES = (
    "none",
    "mixup",
    "cutout",
    "videomix-spatial",
    "videomix-temporal",
    "videomix-st",
    "videomix-perframe",
)


@dataclass(frozen=True)
class SyntheticSpec:
    """Scene-biased dataset plan; defaults give 8x32x32x3 clips, 4 classes."""

    k: int = 4
    clips_per_class: int = 200
    t: int = 8
    h: int = 32
    w: int = 32
    c: int = 3
    bias: float = 0.9
    noise: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueOutOfRange(f"need K >= 2 classes, got {self.k}")
        if not 0.0 <= self.bias <= 1.0:
            raise ValueOutOfRange(f"bias must be in [0,1], got {self.bias}")
        if self.clips_per_class < 1:
            raise ValueOutOfRange(f"clips_per_class must be >= 1, got {self.clips_per_class}")
        if self.noise < 0.0:
            raise ValueOutOfRange(f"noise must be >= 0, got {self.noise}")
        travel = SPRITE_STEP * (self.t - 1) + SPRITE_SIDE
        if travel > self.h or travel > self.w:
            raise SpecInfeasible(
                f"sprite travel {travel} exceeds frame size ({self.h}x{self.w})"
            )


@dataclass(frozen=True)
class ToyModel:
    """Linear classifier over pooled features: logits = feats @ W.T + b."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        bias = np.asarray(self.bias, dtype=np.float64)
        if weights.ndim != 2 or bias.shape != (weights.shape[0],):
            raise DimMismatch(
                f"weights (K,F) and bias (K,) disagree: {weights.shape} vs {bias.shape}"
            )
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
            raise ValueOutOfRange("model parameters must be finite")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)

    @classmethod
    def zeros(cls, k: int, f: int) -> "ToyModel":
        return cls(np.zeros((k, f)), np.zeros(k))

    def logits(self, feats: np.ndarray) -> np.ndarray:
        return feats @ self.weights.T + self.bias


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 16
    batch_size: int = 64
    lr: float = 0.1
    aug: str = "none"
    alpha: float = 0.2
    prob: float = 1.0
    n_videos: int = 2
    cutout_side: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueOutOfRange(
                f"epochs and batch_size must be >= 1, got ({self.epochs}, {self.batch_size})"
            )
        if self.lr < 0.0:
            raise ValueOutOfRange(f"lr must be >= 0, got {self.lr}")
        if self.aug not in AUG_CHOICES:
            raise ValueOutOfRange(
                f"unknown aug {self.aug!r}; valid choices: {', '.join(AUG_CHOICES)}"
            )


@dataclass(frozen=True)
class Metrics:
    """Per-epoch training curves; all three tuples have length epochs."""

    train_loss: tuple[float, ...]
    val_loss: tuple[float, ...]
    val_top1: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.train_loss) == len(self.val_loss) == len(self.val_top1)):
            raise DimMismatch("metric series lengths differ")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["epoch", "train_loss", "val_loss", "val_top1"])
        for e, row in enumerate(zip(self.train_loss, self.val_loss, self.val_top1)):
            writer.writerow([e, repr(row[0]), repr(row[1]), repr(row[2])])
        return buf.getvalue()


# --- dataset ----------------------------------------------------------------


def _background_level(class_idx: int, k: int) -> float:
    # Brightness grades so convex mixtures of two levels land on or between
    # other classes' levels; this is what defeats the shortcut under mixing.
    return (class_idx + 1) / (k + 1)


def _render_clip(spec: SyntheticSpec, direction: int, bg_class: int,
                 rng: RngStream) -> VideoClip:
    t, h, w, c = spec.t, spec.h, spec.w, spec.c
    level = _background_level(bg_class, spec.k)
    frames = np.full((t, h, w, c), level, dtype=np.float64)

    # Sprite: a bright square sweeping along the motion axis, with jittered
    # start position and perpendicular offset.
    axis_dim = w if direction in (0, 1) else h
    perp_dim = h if direction in (0, 1) else w
    travel = SPRITE_STEP * (t - 1) + SPRITE_SIDE
    start = rng.randint_below(axis_dim - travel + 1)
    perp = rng.randint_below(perp_dim - SPRITE_SIDE + 1)
    for ti in range(t):
        pos = start + SPRITE_STEP * ti
        if direction in (1, 3):
            pos = axis_dim - SPRITE_SIDE - pos
        if direction in (0, 1):
            frames[ti, perp:perp + SPRITE_SIDE, pos:pos + SPRITE_SIDE, :] = 1.0
        else:
            frames[ti, pos:pos + SPRITE_SIDE, perp:perp + SPRITE_SIDE, :] = 1.0

    if spec.noise > 0.0:
        jitter = rng.uniforms(t * h * w * c).reshape(t, h, w, c)
        frames = np.clip(frames + spec.noise * (2.0 * jitter - 1.0), 0.0, 1.0)
    return VideoClip(frames.astype(np.float32))


def _draw_bg_class(true_class: int, k: int, bias: float, rng: RngStream) -> int:
    # With probability bias the scene matches the class; otherwise uniform
    # over the other k-1 classes, so the match rate is exactly bias.
    if rng.uniform() < bias:
        return true_class
    other = rng.randint_below(k - 1)
    return other if other < true_class else other + 1


def gen_biased_dataset(spec: SyntheticSpec) -> tuple[ClipBatch, ClipBatch]:
    """Deterministic (train, test) batches; train scenes biased, test uniform."""
    root = RngStream(spec.seed)
    splits = []
    for split_idx, name in enumerate(("train", "test")):
        items = []
        i = 0
        for cls in range(spec.k):
            for _ in range(spec.clips_per_class):
                rng = root.spawn(epoch=split_idx, sample=i)
                if name == "train":
                    bg = _draw_bg_class(cls, spec.k, spec.bias, rng)
                else:
                    bg = rng.randint_below(spec.k)
                clip = _render_clip(spec, cls, bg, rng)
                items.append(BatchItem(f"{name}-{i:04d}", clip,
                                       SoftLabel.one_hot(cls, spec.k)))
                i += 1
        splits.append(ClipBatch(tuple(items)))
    return splits[0], splits[1]


# --- model ------------------------------------------------------------------


def pooled_dim(t: int, h: int, w: int) -> int:
    return (t // POOL_T) * (h // POOL_H) * (w // POOL_W)


def pooled_features(stacked: np.ndarray) -> np.ndarray:
    """(N,T,H,W,C) -> (N,F): mean over channels and 2x4x4 blocks."""
    n, t, h, w, c = stacked.shape
    if t % POOL_T or h % POOL_H or w % POOL_W:
        raise DimMismatch(
            f"clip dims ({t},{h},{w}) must be divisible by ({POOL_T},{POOL_H},{POOL_W})"
        )
    x = stacked.reshape(
        n, t // POOL_T, POOL_T, h // POOL_H, POOL_H, w // POOL_W, POOL_W, c
    )
    x = x.mean(axis=(2, 4, 6, 7), dtype=np.float64)
    return x.reshape(n, -1)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def soft_ce_loss(logits: np.ndarray, label: SoftLabel) -> tuple[float, np.ndarray]:
    """Cross-entropy against a soft target; returns (loss, dloss/dlogits)."""
    z = np.asarray(logits, dtype=np.float64)
    shifted = z - z.max()
    log_probs = shifted - np.log(np.exp(shifted).sum())
    loss = float(-(label.masses * log_probs).sum())
    grad = np.exp(log_probs) - label.masses
    return loss, grad


def batch_loss_grads(
    model: ToyModel, feats: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean soft-CE over the batch and gradients w.r.t. weights and bias."""
    z = model.logits(feats)
    shifted = z - z.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = float(-(labels * log_probs).sum(axis=1).mean())
    dlogits = (np.exp(log_probs) - labels) / feats.shape[0]
    grad_w = dlogits.T @ feats
    grad_b = dlogits.sum(axis=0)
    return loss, grad_w, grad_b


def _augment_batch(
    sub: ClipBatch, cfg: TrainConfig, rng: RngStream
) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Augmented (clips, labels) arrays, or None when the batch is unchanged."""
    # A lone trailing item has no partner; self-pairing would be an identity
    # mix anyway, so pass it through.
    if cfg.aug == "none" or len(sub) < 2:
        return None
    if cfg.aug.startswith("videomix-"):
        variant = MixVariant.from_string(cfg.aug.removeprefix("videomix-"))
        mixed = videomix_batch(sub, variant, cfg.alpha, cfg.prob, cfg.n_videos, rng)
        if all(it.recipe is None for it in mixed):
            return None
        return mixed.stacked(), mixed.labels()

    batch_rng = rng.spawn(sample=BATCH_LANE)
    if batch_rng.uniform() >= cfg.prob:
        return None
    if cfg.aug == "cutout":
        clips = [
            cutout_video(it.clip, cfg.cutout_side, rng.spawn(sample=i)).data
            for i, it in enumerate(sub)
        ]
        return np.stack(clips), sub.labels()
    # mixup: pair through one permutation, one lambda per item
    perm = batch_rng.permutation(len(sub))
    clips, labels = [], []
    for i, it in enumerate(sub):
        partner = sub[perm[i]]
        clip, label = mixup_video(it.clip, it.label, partner.clip, partner.label,
                                  cfg.alpha, rng.spawn(sample=i))
        clips.append(clip.data)
        labels.append(label.masses)
    return np.stack(clips), np.stack(labels)


def train(
    model: ToyModel,
    data: ClipBatch,
    cfg: TrainConfig,
    val: ClipBatch,
) -> tuple[ToyModel, Metrics]:
    """Mini-batch gradient descent with optional per-batch augmentation.

    Batches are drawn from a fresh shuffle each epoch; augmentation
    randomness is addressed by (seed, epoch, batch, sample), so reruns with
    the same config reproduce the metrics bit for bit.
    """
    weights = np.array(model.weights)
    bias = np.array(model.bias)
    n = len(data)
    root = RngStream(cfg.seed)
    # Clean items keep their pooled features for the whole run; only batches
    # the augmentation actually touched are re-pooled.
    base_feats = pooled_features(data.stacked())
    base_labels = data.labels()
    val_feats = pooled_features(val.stacked())
    val_labels = val.labels()
    val_truth = np.argmax(val_labels, axis=1)
    train_losses, val_losses, val_top1s = [], [], []
    for epoch in range(cfg.epochs):
        order = root.spawn(epoch=epoch, batch=BATCH_LANE).permutation(n)
        epoch_losses = []
        for b, lo in enumerate(range(0, n, cfg.batch_size)):
            idx = order[lo:lo + cfg.batch_size]
            sub = ClipBatch(tuple(data[i] for i in idx))
            augmented = _augment_batch(sub, cfg, root.spawn(epoch=epoch, batch=b))
            if augmented is None:
                feats, ys = base_feats[idx], base_labels[idx]
            else:
                feats, ys = pooled_features(augmented[0]), augmented[1]
            step_model = ToyModel(weights, bias)
            loss, grad_w, grad_b = batch_loss_grads(step_model, feats, ys)
            if not np.isfinite(loss):
                raise Diverged(epoch, f"non-finite loss {loss} at epoch {epoch}")
            weights = weights - cfg.lr * grad_w
            bias = bias - cfg.lr * grad_b
            epoch_losses.append(loss)
        current = ToyModel(weights, bias)
        val_loss, _, _ = batch_loss_grads(current, val_feats, val_labels)
        if not np.isfinite(val_loss):
            raise Diverged(epoch, f"non-finite validation loss at epoch {epoch}")
        pred = np.argmax(current.logits(val_feats), axis=1)
        train_losses.append(float(np.mean(epoch_losses)))
        val_losses.append(val_loss)
        val_top1s.append(float(np.mean(pred == val_truth)))
    return ToyModel(weights, bias), Metrics(
        tuple(train_losses), tuple(val_losses), tuple(val_top1s)
    )


def evaluate(model: ToyModel, data: ClipBatch, views: Optional[ViewSpec] = None) -> float:
    """Top-1 accuracy; with views, per-view probabilities are averaged
    before the argmax (ties break to the lowest class index)."""
    labels = data.labels()
    truth = np.argmax(labels, axis=1)
    if views is None:
        feats = pooled_features(data.stacked())
        pred = np.argmax(model.logits(feats), axis=1)
        return float(np.mean(pred == truth))
    correct = 0
    for item, target in zip(data, truth):
        crops = multiview_crops(item.clip, views)
        feats = pooled_features(np.stack([v.data for v in crops]))
        probs = _softmax(model.logits(feats)).mean(axis=0)
        correct += int(np.argmax(probs) == target)
    return correct / len(data)


# --- experiment driver --------------------------------------------------------


def run_experiment(spec: SyntheticSpec, cfg: TrainConfig) -> tuple[Metrics, float]:
    """Generate data, train from zeros, return (metrics, test top-1)."""
    train_batch, test_batch = gen_biased_dataset(spec)
    model = ToyModel.zeros(spec.k, pooled_dim(spec.t, spec.h, spec.w))
    model, metrics = train(model, train_batch, cfg, val=test_batch)
    return metrics, evaluate(model, test_batch)


_SPEC_KEYS = {
    "k": int, "clips_per_class": int, "t": int, "h": int, "w": int, "c": int,
    "bias": float, "noise": float, "data_seed": int,
}
_CFG_KEYS = {
    "epochs": int, "batch_size": int, "lr": float, "aug": str, "alpha": float,
    "prob": float, "n_videos": int, "cutout_side": int, "seed": int,
}


def parse_experiment_config(text: str) -> tuple[SyntheticSpec, TrainConfig]:
    """Parse 'key = value' lines (# comments allowed) into the two configs."""
    spec_kwargs: dict = {}
    cfg_kwargs: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueOutOfRange(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in _SPEC_KEYS:
            target, caster = spec_kwargs, _SPEC_KEYS[key]
            dest = "seed" if key == "data_seed" else key
        elif key in _CFG_KEYS:
            target, caster = cfg_kwargs, _CFG_KEYS[key]
            dest = key
        else:
            raise ValueOutOfRange(f"unknown config key {key!r} on line {lineno}")
        try:
            target[dest] = caster(value)
        except ValueError:
            raise ValueOutOfRange(
                f"bad value for key {key!r} on line {lineno}: {value!r}"
            ) from None
    return SyntheticSpec(**spec_kwargs), TrainConfig(**cfg_kwargs)


def config_with_aug(cfg: TrainConfig, aug: str) -> TrainConfig:
    """Copy of cfg with a different augmentation choice."""
    return replace(cfg, aug=aug)
