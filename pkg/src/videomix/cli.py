"""Command-line entry points.

Subcommands: augment (pair or whole-batch clip mixing), sample-mask (inspect
a sampled cuboid as a volume), train-toy (run the bias experiment from a
config file), eval-wstal (score proposals against ground truth), and cam
(render a class activation volume).

Conventions: machine-parseable JSON on stdout, human diagnostics on stderr,
all randomness addressed by --seed (plus optional RNG path flags), files
written atomically. Exit codes: 0 success, 2 bad input or contract
violation, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .cam import (
    TCam,
    evaluation_report,
    extract_proposals,
    gts_from_records,
    proposals_from_records,
    render_cam,
    st_cam,
)
from .clips import BatchItem, ClipBatch, SoftLabel, VideoClip
from .errors import VideoMixError
from .mixers import recipe_record, videomix_batch, videomix_pair
from .rng import RngStream
from .sampler import MixVariant, build_mask, exact_fraction, sample_cuboid, sample_lambda
from .toylab import parse_experiment_config, run_experiment
from .vct import read_labels_file, read_vct_file, write_labels_file, write_vct

VARIANT_NAMES = [v.value for v in MixVariant]


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_text(path: Path, text: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def _label_for(labels: list[tuple[str, SoftLabel]], clip_path: Path) -> SoftLabel:
    stem = clip_path.name
    stem = stem[: -len(".vct")] if stem.endswith(".vct") else clip_path.stem
    for clip_id, label in labels:
        if clip_id == stem:
            return label
    raise VideoMixError(f"no label with id {stem!r} in labels file")


def _rng_from_flags(args: argparse.Namespace) -> RngStream:
    return RngStream(
        seed=args.seed,
        epoch=getattr(args, "epoch", 0),
        batch=getattr(args, "batch_index", 0),
        sample=getattr(args, "sample", 0),
    )


def _sidecar(path: Path, suffix: str) -> Path:
    name = path.name
    base = name[: -len(".vct")] if name.endswith(".vct") else name
    return path.with_name(base + suffix)


def run_augment(args: argparse.Namespace) -> int:
    labels = read_labels_file(args.labels)
    variant = MixVariant.from_string(args.variant)

    if args.inputs:
        paths = [Path(p) for p in args.inputs]
        items = []
        for p in paths:
            clip = read_vct_file(p)
            stem = p.name[: -len(".vct")] if p.name.endswith(".vct") else p.stem
            items.append(BatchItem(stem, clip, _label_for(labels, p)))
        batch = ClipBatch(tuple(items))
        rng = RngStream(seed=args.seed, epoch=args.epoch, batch=args.batch_index)
        mixed = videomix_batch(
            batch, variant, args.alpha, args.prob, args.n_videos, rng
        )
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for item in mixed:
            _atomic_write_bytes(out_dir / f"{item.id}.vct", write_vct(item.clip))
        label_lines = [
            json.dumps({"id": it.id, "label": it.label.masses.tolist()})
            for it in mixed
        ]
        _atomic_write_text(out_dir / "labels.jsonl", "\n".join(label_lines) + "\n")
        recipes = [
            recipe_record(it.recipe) if it.recipe is not None else None
            for it in mixed
        ]
        _atomic_write_text(
            out_dir / "recipes.json", json.dumps(recipes, indent=2) + "\n"
        )
        print(json.dumps({
            "mode": "batch",
            "items": len(mixed),
            "applied": mixed[0].recipe is not None,
            "out_dir": str(out_dir),
        }))
        return 0

    a_path, b_path = Path(args.a), Path(args.b)
    clip_a = read_vct_file(a_path)
    clip_b = read_vct_file(b_path)
    label_a = _label_for(labels, a_path)
    label_b = _label_for(labels, b_path)
    rng = _rng_from_flags(args)
    clip, label, recipe = videomix_pair(
        clip_a, label_a, clip_b, label_b, variant, args.alpha, rng
    )
    out = Path(args.out)
    _atomic_write_bytes(out, write_vct(clip))
    _atomic_write_text(
        _sidecar(out, ".label.jsonl"),
        json.dumps({"id": out.stem, "label": label.masses.tolist()}) + "\n",
    )
    _atomic_write_text(
        _sidecar(out, ".recipe.json"), json.dumps(recipe_record(recipe), indent=2) + "\n"
    )
    print(json.dumps({
        "mode": "pair",
        "keep_fraction": recipe.keep_fraction,
        "out": str(out),
    }))
    return 0


def run_sample_mask(args: argparse.Namespace) -> int:
    variant = MixVariant.from_string(args.variant)
    if variant is MixVariant.PERFRAME:
        raise VideoMixError("sample-mask supports single-cuboid variants only")
    rng = _rng_from_flags(args)
    lam = args.lam if args.lam is not None else sample_lambda(args.alpha, rng)
    coords = sample_cuboid(variant, lam, args.frames, args.height, args.width, rng)
    mask = build_mask(coords, args.frames, args.height, args.width)
    clip = VideoClip(mask[..., None].astype(np.float32))
    _atomic_write_bytes(Path(args.out), write_vct(clip))
    print(json.dumps({
        "variant": variant.value,
        "lambda": lam,
        "coords": list(coords.as_tuple()),
        "fraction": exact_fraction(coords, args.frames, args.height, args.width),
        "out": args.out,
    }))
    return 0


def run_train_toy(args: argparse.Namespace) -> int:
    text = Path(args.config).read_text()
    spec, cfg = parse_experiment_config(text)
    metrics, test_top1 = run_experiment(spec, cfg)
    _atomic_write_text(Path(args.out_csv), metrics.to_csv())
    print(json.dumps({
        "aug": cfg.aug,
        "test_top1": test_top1,
        "final_val_loss": metrics.val_loss[-1],
        "epochs": len(metrics.val_loss),
        "out_csv": args.out_csv,
    }))
    print(f"aug={cfg.aug} test_top1={test_top1}", file=sys.stderr)
    return 0


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def run_eval_wstal(args: argparse.Namespace) -> int:
    gt_records = _load_json(args.gt)
    if not gt_records:
        raise VideoMixError("no ground truth records in gt file")
    gts = gts_from_records(gt_records)

    if args.proposals:
        proposals = proposals_from_records(_load_json(args.proposals))
    else:
        if not args.tcam:
            raise VideoMixError("eval-wstal needs --tcam or --proposals")
        clip = read_vct_file(args.tcam)
        tcam_scores = clip.data.reshape(clip.frames, clip.channels).astype(np.float64)
        tcam = TCam(tcam_scores)
        proposals = []
        for k in range(tcam.k):
            proposals.extend(
                extract_proposals(
                    tcam, k, args.threshold_ratio, video_id=args.video_id
                )
            )
    thresholds = [float(tok) for tok in args.thresholds.split(",") if tok.strip()]
    report = evaluation_report(proposals, gts, thresholds)
    print(json.dumps(report, sort_keys=True))
    return 0


def run_cam(args: argparse.Namespace) -> int:
    clip = read_vct_file(args.features)
    spec = _load_json(args.weights)
    if not isinstance(spec, dict) or "weights" not in spec:
        raise VideoMixError("weights file needs a 'weights' field")
    weights = np.asarray(spec["weights"], dtype=np.float64)
    if weights.ndim == 1:
        class_weight = weights
    elif weights.ndim == 2:
        if not 0 <= args.class_index < weights.shape[0]:
            raise VideoMixError(
                f"class index {args.class_index} out of range for "
                f"{weights.shape[0]} classes"
            )
        class_weight = weights[args.class_index]
    else:
        raise VideoMixError(f"weights must be (K,C) or (C,), got shape {weights.shape}")
    # Clips store (T,H,W,C); the contraction wants channels first.
    fmap = np.moveaxis(clip.data.astype(np.float64), 3, 0)
    volume = st_cam(fmap, class_weight)
    t = args.target_frames or clip.frames
    h = args.target_height or clip.height
    w = args.target_width or clip.width
    rendered = render_cam(volume, t, h, w)
    _atomic_write_bytes(Path(args.out), write_vct(rendered))
    print(json.dumps({
        "source_shape": list(volume.volume.shape),
        "rendered_shape": list(rendered.shape),
        "out": args.out,
    }))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="videomix",
        description="Cut-and-paste video mixing toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="mix stored clips (pair or batch)")
    p.add_argument("--a", help="first clip (pair mode)")
    p.add_argument("--b", help="second clip (pair mode)")
    p.add_argument("--inputs", nargs="+", help="clip files (batch mode)")
    p.add_argument("--labels", required=True, help="JSON-lines label file")
    p.add_argument("--variant", required=True, choices=VARIANT_NAMES)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--prob", type=float, default=1.0, help="batch apply probability")
    p.add_argument("--n-videos", type=int, default=2, dest="n_videos")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epoch", type=int, default=0)
    p.add_argument("--batch-index", type=int, default=0, dest="batch_index")
    p.add_argument("--sample", type=int, default=0)
    p.add_argument("--out", help="output clip path (pair mode)")
    p.add_argument("--out-dir", dest="out_dir", help="output directory (batch mode)")
    p.set_defaults(func=run_augment)

    p = sub.add_parser("sample-mask", help="sample a cuboid and export its mask")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--variant", required=True, choices=VARIANT_NAMES)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=None,
                   help="fix lambda instead of sampling it")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epoch", type=int, default=0)
    p.add_argument("--batch-index", type=int, default=0, dest="batch_index")
    p.add_argument("--sample", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=run_sample_mask)

    p = sub.add_parser("train-toy", help="run the scene-bias toy experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out-csv", required=True, dest="out_csv")
    p.set_defaults(func=run_train_toy)

    p = sub.add_parser("eval-wstal", help="score temporal proposals with mAP")
    p.add_argument("--tcam", help="VCT file of per-segment class scores (S,1,1,K)")
    p.add_argument("--proposals", help="JSON file of proposal records")
    p.add_argument("--gt", required=True, help="JSON file of ground-truth records")
    p.add_argument("--thresholds", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")
    p.add_argument("--threshold-ratio", type=float, default=0.5,
                   dest="threshold_ratio")
    p.add_argument("--video-id", default="", dest="video_id")
    p.set_defaults(func=run_eval_wstal)

    p = sub.add_parser("cam", help="render a class activation volume")
    p.add_argument("--features", required=True, help="VCT feature map (T,H,W,C)")
    p.add_argument("--weights", required=True, help="JSON with 'weights' (K,C) or (C,)")
    p.add_argument("--class-index", type=int, default=0, dest="class_index")
    p.add_argument("--target-frames", type=int, default=0, dest="target_frames")
    p.add_argument("--target-height", type=int, default=0, dest="target_height")
    p.add_argument("--target-width", type=int, default=0, dest="target_width")
    p.add_argument("--out", required=True)
    p.set_defaults(func=run_cam)

    return parser


def _validate_mode_flags(args: argparse.Namespace) -> None:
    if args.command != "augment":
        return
    pair_mode = args.a is not None or args.b is not None
    batch_mode = args.inputs is not None
    if pair_mode == batch_mode:
        raise VideoMixError(
            "augment needs either --a/--b/--out (pair) or --inputs/--out-dir (batch)"
        )
    if pair_mode and (args.a is None or args.b is None or args.out is None):
        raise VideoMixError("pair mode needs --a, --b, and --out")
    if batch_mode and (args.out_dir is None or len(args.inputs) < 2):
        raise VideoMixError("batch mode needs --out-dir and at least two --inputs")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate_mode_flags(args)
        return args.func(args)
    except VideoMixError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal failure path
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
