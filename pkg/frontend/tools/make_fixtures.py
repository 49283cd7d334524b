"""Generate binding parity fixtures from the core Python API.

Every fixture stores the inputs a binding call needs plus the expected
outputs computed directly with the library (never through the CLI), so the
TypeScript tests compare two independent routes to the same bytes.

Run from anywhere: paths are resolved relative to this file.
"""

import base64
import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT / "src"))

from videomix.clips import BatchItem, ClipBatch, SoftLabel, VideoClip  # noqa: E402
from videomix.feature_mix import FeatureSequence, feature_to_clip, temporal_featmix  # noqa: E402
from videomix.mixers import recipe_record, videomix_batch  # noqa: E402
from videomix.rng import RngStream  # noqa: E402
from videomix.sampler import MixVariant  # noqa: E402
from videomix.vct import write_vct  # noqa: E402

FIXTURE_DIR = Path(__file__).resolve().parents[1] / "test" / "fixtures"
ALPHAS = [0.2, 0.5, 1.0, 2.0]
VARIANTS = ["spatial", "temporal", "st", "perframe"]


def b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def soft_label(rng, k):
    if rng.random() < 0.6:
        masses = np.zeros(k)
        masses[int(rng.integers(k))] = 1.0
    else:
        masses = rng.dirichlet(np.ones(k))
        masses = masses / masses.sum()
    return SoftLabel(masses)


def featmix_case(i: int) -> dict:
    rng = np.random.default_rng(20_000 + i)
    s = 4 + i % 9
    d = 2 + i % 7
    k = 2 + i % 4
    alpha = ALPHAS[i % len(ALPHAS)]
    path = {"seed": 9_000 + i, "epoch": i % 3, "batchIndex": i % 5, "sample": i % 7}
    a = FeatureSequence(rng.random((s, d), dtype=np.float32), soft_label(rng, k))
    b = FeatureSequence(rng.random((s, d), dtype=np.float32), soft_label(rng, k))
    stream = RngStream(seed=path["seed"], epoch=path["epoch"],
                       batch=path["batchIndex"], sample=path["sample"])
    mixed, recipe = temporal_featmix(a, b, alpha, stream)
    return {
        "alpha": alpha,
        "path": path,
        "s": s,
        "d": d,
        "aVct": b64(write_vct(feature_to_clip(a))),
        "bVct": b64(write_vct(feature_to_clip(b))),
        "aLabel": a.label.masses.tolist(),
        "bLabel": b.label.masses.tolist(),
        "expectedVct": b64(write_vct(feature_to_clip(mixed))),
        "expectedLabel": mixed.label.masses.tolist(),
        "expectedKeepFraction": recipe.keep_fraction,
    }


def batch_case(i: int) -> dict:
    rng = np.random.default_rng(30_000 + i)
    variant = VARIANTS[i % len(VARIANTS)]
    n_videos = 2 if variant == "perframe" else 2 + i % 3
    n_items = max(n_videos, 3 + i % 2)
    t = 3 + i % 3
    h = 4 + i % 4
    w = 4 + i % 3
    c = 1 + i % 2
    k = 3
    alpha = ALPHAS[i % len(ALPHAS)]
    prob = 0.0 if i % 11 == 7 else (0.5 if i % 7 == 3 else 1.0)
    seed, epoch, batch_index = 5_000 + i, i % 4, i % 6

    items = tuple(
        BatchItem(f"item{j}", VideoClip(rng.random((t, h, w, c), dtype=np.float32)),
                  soft_label(rng, k))
        for j in range(n_items)
    )
    mixed = videomix_batch(
        ClipBatch(items), MixVariant.from_string(variant), alpha, prob,
        n_videos, RngStream(seed=seed, epoch=epoch, batch=batch_index),
    )
    # These two strings must match the CLI's batch-mode artifacts byte for
    # byte; they pin the on-disk formatting, not just the values.
    labels_jsonl = "\n".join(
        json.dumps({"id": it.id, "label": it.label.masses.tolist()}) for it in mixed
    ) + "\n"
    recipes_json = json.dumps(
        [recipe_record(it.recipe) if it.recipe is not None else None for it in mixed],
        indent=2,
    ) + "\n"
    return {
        "variant": variant,
        "alpha": alpha,
        "prob": prob,
        "nVideos": n_videos,
        "seed": seed,
        "epoch": epoch,
        "batchIndex": batch_index,
        "items": [
            {"id": it.id, "vct": b64(write_vct(it.clip)),
             "label": it.label.masses.tolist()}
            for it in items
        ],
        "expected": {
            "items": [
                {"id": it.id, "vct": b64(write_vct(it.clip)),
                 "label": it.label.masses.tolist()}
                for it in mixed
            ],
            "applied": mixed[0].recipe is not None,
            "labelsJsonl": labels_jsonl,
            "recipesJson": recipes_json,
        },
    }


def container_fixture() -> dict:
    values = (np.arange(256, dtype=np.float32) / np.float32(255)).reshape(16, 4, 4, 1)
    clip = VideoClip(values)
    rng = np.random.default_rng(77)
    rand_clip = VideoClip(rng.random((3, 5, 4, 2), dtype=np.float32))
    return {
        "allBytesF32": b64(write_vct(clip, dtype=1)),
        "allBytesU8": b64(write_vct(clip, dtype=2)),
        "randomF32": b64(write_vct(rand_clip, dtype=1)),
        "randomU8": b64(write_vct(rand_clip, dtype=2)),
    }


def main() -> None:
    for sub, builder, count in [("featmix", featmix_case, 100),
                                ("batch", batch_case, 100)]:
        out_dir = FIXTURE_DIR / sub
        out_dir.mkdir(parents=True, exist_ok=True)
        for i in range(count):
            path = out_dir / f"case_{i:03d}.json"
            path.write_text(json.dumps(builder(i)) + "\n")
    (FIXTURE_DIR / "container.json").write_text(
        json.dumps(container_fixture()) + "\n"
    )
    print(f"wrote fixtures under {FIXTURE_DIR}")


if __name__ == "__main__":
    main()
