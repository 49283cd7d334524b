"""Temporal class-activation proposals and mAP evaluation, plus 3-D CAMs.

Segment scores come from a linear head applied to per-segment features.
Proposals are maximal runs of segments scoring at least a fixed ratio of the
class maximum; they are matched greedily one-to-one against ground truth at
multiple IoU thresholds and summarized as mAP. All intervals are half-open
segment-index ranges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .clips import VideoClip
from .errors import BadRecord, DimMismatch, EmptyInterval, ValueOutOfRange
from .feature_mix import FeatureSequence

DEFAULT_THRESHOLD_RATIO = 0.5
DEFAULT_IOU_THRESHOLDS = tuple(k / 10 for k in range(1, 10))


@dataclass(frozen=True)
class TCam:
    """S x K per-segment, per-class activation matrix."""

    scores: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 2 or scores.shape[0] < 1 or scores.shape[1] < 1:
            raise DimMismatch(f"scores must be (S,K) with S,K >= 1, got {scores.shape}")
        if not np.all(np.isfinite(scores)):
            raise ValueOutOfRange("scores must be finite")
        scores = np.ascontiguousarray(scores)
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)

    @property
    def segments(self) -> int:
        return self.scores.shape[0]

    @property
    def k(self) -> int:
        return self.scores.shape[1]


@dataclass(frozen=True)
class Proposal:
    """Scored half-open segment interval [start, end) for one class."""

    k: int
    start: int
    end: int
    score: float
    video_id: str = ""

    def __post_init__(self):
        if self.start < 0:
            raise ValueOutOfRange(f"start must be >= 0, got {self.start}")
        if self.start >= self.end:
            raise EmptyInterval(f"need start < end, got [{self.start}, {self.end})")


@dataclass(frozen=True)
class GtSegment:
    """Ground-truth half-open segment interval for one class."""

    k: int
    start: int
    end: int
    video_id: str = ""

    def __post_init__(self):
        if self.start >= self.end:
            raise EmptyInterval(f"need start < end, got [{self.start}, {self.end})")


@dataclass(frozen=True)
class StCam:
    """T' x H' x W' activation volume for one class."""

    volume: np.ndarray

    def __post_init__(self):
        volume = np.asarray(self.volume, dtype=np.float64)
        if volume.ndim != 3 or min(volume.shape) < 1:
            raise DimMismatch(f"volume must be 3-D (T,H,W), got {volume.shape}")
        volume = np.ascontiguousarray(volume)
        volume.setflags(write=False)
        object.__setattr__(self, "volume", volume)


def compute_tcam(
    features: FeatureSequence,
    class_weights: np.ndarray,
    class_bias: np.ndarray,
) -> TCam:
    """scores[s,k] = sum_d features[s,d] * class_weights[k,d] + class_bias[k]."""
    weights = np.asarray(class_weights, dtype=np.float64)
    bias = np.asarray(class_bias, dtype=np.float64)
    if weights.ndim != 2 or weights.shape[1] != features.dim:
        raise DimMismatch(
            f"class_weights must be (K,{features.dim}), got {weights.shape}"
        )
    if bias.shape != (weights.shape[0],):
        raise DimMismatch(f"class_bias must be ({weights.shape[0]},), got {bias.shape}")
    scores = features.data.astype(np.float64) @ weights.T + bias
    return TCam(scores)


def extract_proposals(
    tcam: TCam,
    k: int,
    threshold_ratio: float = DEFAULT_THRESHOLD_RATIO,
    *,
    video_id: str = "",
    shift_nonpositive: bool = True,
) -> list[Proposal]:
    """Maximal runs of segments scoring >= ratio * class max.

    Proposal scores are the mean original activation over the run. When the
    class maximum is <= 0 the ratio rule is ill-posed (the threshold would
    sit above the maximum); with ``shift_nonpositive`` the column is shifted
    by its minimum for thresholding only, which keeps the argmax segment in
    some proposal. Disabling the shift applies the literal rule and may
    return nothing.
    """
    if not 0.0 <= threshold_ratio <= 1.0:
        raise ValueOutOfRange(f"threshold_ratio must be in [0,1], got {threshold_ratio}")
    col = tcam.scores[:, k]
    level = col
    m = float(col.max())
    if m <= 0.0 and shift_nonpositive:
        level = col - col.min()
        m = float(level.max())
    theta = threshold_ratio * m
    keep = level >= theta

    proposals = []
    s = 0
    n = col.size
    while s < n:
        if not keep[s]:
            s += 1
            continue
        e = s
        while e < n and keep[e]:
            e += 1
        proposals.append(
            Proposal(k=k, start=s, end=e, score=float(col[s:e].mean()), video_id=video_id)
        )
        s = e
    return proposals


def temporal_iou(a: tuple[int, int], b: tuple[int, int]) -> float:
    """Intersection over union of two half-open intervals; 0 when disjoint."""
    a1, a2 = a
    b1, b2 = b
    if a1 >= a2 or b1 >= b2:
        raise EmptyInterval(f"intervals must be nonempty, got {a} and {b}")
    inter = max(0, min(a2, b2) - max(a1, b1))
    union = (a2 - a1) + (b2 - b1) - inter
    return inter / union


def average_precision(
    proposals: Sequence[Proposal],
    gts: Sequence[GtSegment],
    k: int,
    iou_thr: float,
) -> Optional[float]:
    """Greedy one-to-one AP for class k; None when the class has no gts
    and no proposals (skipped from class means), 0.0 when it has proposals
    but nothing to hit."""
    cand = sorted(
        (p for p in proposals if p.k == k),
        key=lambda p: (-p.score, p.video_id, p.start, p.end),
    )
    targets = [g for g in gts if g.k == k]
    if not targets:
        return 0.0 if cand else None

    matched = [False] * len(targets)
    tp = 0
    ap = 0.0
    for rank, p in enumerate(cand, start=1):
        best_iou = 0.0
        best_j = -1
        for j, g in enumerate(targets):
            if matched[j] or g.video_id != p.video_id:
                continue
            iou = temporal_iou((p.start, p.end), (g.start, g.end))
            if iou > best_iou:
                best_iou = iou
                best_j = j
        if best_j >= 0 and best_iou >= iou_thr:
            matched[best_j] = True
            tp += 1
            ap += tp / rank
    return ap / len(targets)


def _classes_under_test(proposals: Sequence[Proposal], gts: Sequence[GtSegment]) -> list[int]:
    return sorted({g.k for g in gts} | {p.k for p in proposals})


def mean_map(
    proposals: Sequence[Proposal],
    gts: Sequence[GtSegment],
    thresholds: Sequence[float] = DEFAULT_IOU_THRESHOLDS,
) -> float:
    """Mean over IoU thresholds of the mean per-class AP."""
    if not thresholds:
        raise ValueOutOfRange("thresholds must be nonempty")
    per_thr = []
    classes = _classes_under_test(proposals, gts)
    for thr in thresholds:
        aps = [average_precision(proposals, gts, k, thr) for k in classes]
        aps = [a for a in aps if a is not None]
        per_thr.append(sum(aps) / len(aps) if aps else 0.0)
    return sum(per_thr) / len(per_thr)


def evaluation_report(
    proposals: Sequence[Proposal],
    gts: Sequence[GtSegment],
    thresholds: Sequence[float] = DEFAULT_IOU_THRESHOLDS,
) -> dict:
    """JSON-ready map: threshold -> per-class AP and mAP, plus the mean."""
    if not thresholds:
        raise ValueOutOfRange("thresholds must be nonempty")
    classes = _classes_under_test(proposals, gts)
    per_threshold = {}
    maps = []
    for thr in thresholds:
        per_class = {}
        for k in classes:
            ap = average_precision(proposals, gts, k, thr)
            if ap is not None:
                per_class[str(k)] = ap
        thr_map = sum(per_class.values()) / len(per_class) if per_class else 0.0
        per_threshold[f"{thr:g}"] = {"per_class": per_class, "map": thr_map}
        maps.append(thr_map)
    return {
        "per_threshold": per_threshold,
        "mean_map": sum(maps) / len(maps),
    }


def proposal_record(p: Proposal) -> dict:
    return {"video_id": p.video_id, "class": p.k, "start": p.start,
            "end": p.end, "score": p.score}


def _record_field(record: Mapping, index: int, key: str, convert):
    try:
        value = record[key]
    except (KeyError, TypeError):
        raise BadRecord(f"record {index}: missing field '{key}'") from None
    try:
        return convert(value)
    except (TypeError, ValueError):
        raise BadRecord(f"record {index}: field '{key}' has bad value {value!r}") from None


def proposals_from_records(records: Iterable[Mapping]) -> list[Proposal]:
    return [
        Proposal(k=_record_field(r, i, "class", int),
                 start=_record_field(r, i, "start", int),
                 end=_record_field(r, i, "end", int),
                 score=_record_field(r, i, "score", float),
                 video_id=str(r.get("video_id", "")))
        for i, r in enumerate(records)
    ]


def gts_from_records(records: Iterable[Mapping]) -> list[GtSegment]:
    return [
        GtSegment(k=_record_field(r, i, "class", int),
                  start=_record_field(r, i, "start", int),
                  end=_record_field(r, i, "end", int),
                  video_id=str(r.get("video_id", "")))
        for i, r in enumerate(records)
    ]


def st_cam(feature_map: np.ndarray, class_weight: np.ndarray) -> StCam:
    """Contract the channel axis: volume[t,h,w] = sum_c F[c,t,h,w] * w[c]."""
    fmap = np.asarray(feature_map, dtype=np.float64)
    weight = np.asarray(class_weight, dtype=np.float64)
    if fmap.ndim != 4:
        raise DimMismatch(f"feature_map must be 4-D (C,T,H,W), got {fmap.shape}")
    if weight.shape != (fmap.shape[0],):
        raise DimMismatch(
            f"class_weight must be ({fmap.shape[0]},), got {weight.shape}"
        )
    # Accumulate channels in index order so results are reproducible down to
    # the bit regardless of the backing BLAS.
    volume = np.zeros(fmap.shape[1:], dtype=np.float64)
    for c in range(fmap.shape[0]):
        volume += weight[c] * fmap[c]
    return StCam(volume)


def render_cam(volume: StCam, t: int, h: int, w: int) -> VideoClip:
    """Min-max normalize to [0,1] (constant -> 0.5), nearest-upsample to
    (t, h, w), and return a 1-channel clip for container export."""
    v = volume.volume
    lo = float(v.min())
    hi = float(v.max())
    if hi > lo:
        norm = (v - lo) / (hi - lo)
    else:
        norm = np.full_like(v, 0.5)
    it = (np.arange(t) * v.shape[0]) // t
    ih = (np.arange(h) * v.shape[1]) // h
    iw = (np.arange(w) * v.shape[2]) // w
    up = norm[np.ix_(it, ih, iw)]
    return VideoClip(up[..., None].astype(np.float32))
