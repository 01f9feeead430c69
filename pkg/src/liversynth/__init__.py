"""Deterministic tumor-conditioning image pipeline with FID evaluation."""

from .imaging import BinaryMask, GrayImage, load_png, resize, resize_mask, save_png
from .mask_transform import (
    AnatomicalRegion,
    TransformRanges,
    TransformSpec,
    apply_transform,
    centroid,
    sample_constrained,
)
from .edge_detect import EdgeMap, ThresholdPair, canny, sample_thresholds
from .compose import ConditioningImage, intersect, overlay
from .fid_eval import (
    EmbeddingSet,
    GaussianFit,
    fid,
    fit_gaussian,
    load_emb1,
    save_emb1,
    sqrtm_trace,
    surrogate_embed,
)
from .manifest import GenerationPlan, PatientRecord, expand_plan, load_manifest
from .orchestrator import PipelineConfig, fid_command, run_stage1, verify

__version__ = "0.1.0"
