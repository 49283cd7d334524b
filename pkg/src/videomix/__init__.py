"""Cut-and-paste video mixing toolkit.

Mixes pairs (or small groups) of video clips by replacing sampled
spatio-temporal cuboids and mixing labels by the exact surviving voxel
fractions, plus the surrounding tooling: deterministic counter-based RNG,
a binary clip container, clip/view sampling, feature-space temporal mixing,
temporal activation proposals with mAP scoring, and a desk-scale bias
experiment.
"""

from .cam import (
    GtSegment,
    Proposal,
    StCam,
    TCam,
    average_precision,
    compute_tcam,
    evaluation_report,
    extract_proposals,
    mean_map,
    render_cam,
    st_cam,
    temporal_iou,
)
from .clip_pipeline import (
    ClipSpec,
    ViewSpec,
    hflip,
    jittered_bin_sample,
    multiview_crops,
    sample_training_clip,
    standard_augment,
)
from .clips import (
    BatchItem,
    ClipBatch,
    SoftLabel,
    VideoClip,
    validate_label,
)
from .errors import VideoMixError
from .feature_mix import (
    FeatureSequence,
    clip_to_feature,
    feature_to_clip,
    hide_and_seek,
    temporal_featmix,
)
from .mixers import (
    MixRecipe,
    MixedBatch,
    MixedItem,
    cutout_video,
    mixup_video,
    perframe_videomix,
    recipe_record,
    videomix_batch,
    videomix_pair,
)
from .rng import BATCH_LANE, RngStream
from .sampler import (
    CuboidCoords,
    MixVariant,
    build_mask,
    exact_fraction,
    sample_cuboid,
    sample_lambda,
    sample_spatial_cuboid,
    sample_st_cuboid,
    sample_temporal_cuboid,
)
from .toylab import (
    Metrics,
    SyntheticSpec,
    ToyModel,
    TrainConfig,
    evaluate,
    gen_biased_dataset,
    run_experiment,
    soft_ce_loss,
    train,
)
from .vct import (
    read_vct,
    read_vct_file,
    write_vct,
    write_vct_file,
)

__version__ = "0.1.0"

__all__ = [
    "BATCH_LANE",
    "BatchItem",
    "ClipBatch",
    "ClipSpec",
    "CuboidCoords",
    "FeatureSequence",
    "GtSegment",
    "Metrics",
    "MixRecipe",
    "MixVariant",
    "MixedBatch",
    "MixedItem",
    "Proposal",
    "RngStream",
    "SoftLabel",
    "StCam",
    "SyntheticSpec",
    "TCam",
    "ToyModel",
    "TrainConfig",
    "VideoClip",
    "VideoMixError",
    "ViewSpec",
    "average_precision",
    "build_mask",
    "clip_to_feature",
    "compute_tcam",
    "cutout_video",
    "evaluate",
    "evaluation_report",
    "exact_fraction",
    "extract_proposals",
    "feature_to_clip",
    "gen_biased_dataset",
    "hflip",
    "hide_and_seek",
    "jittered_bin_sample",
    "mean_map",
    "mixup_video",
    "multiview_crops",
    "perframe_videomix",
    "read_vct",
    "read_vct_file",
    "recipe_record",
    "render_cam",
    "run_experiment",
    "sample_cuboid",
    "sample_lambda",
    "sample_spatial_cuboid",
    "sample_st_cuboid",
    "sample_temporal_cuboid",
    "sample_training_clip",
    "soft_ce_loss",
    "st_cam",
    "standard_augment",
    "temporal_featmix",
    "temporal_iou",
    "train",
    "validate_label",
    "videomix_batch",
    "videomix_pair",
    "write_vct",
    "write_vct_file",
]
