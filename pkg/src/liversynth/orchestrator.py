"""Pipeline driver: config, Stage-1 batch generation, verification, FID entry point.

Stage 1 walks the generation plan, derives one RNG per case from the master
seed, samples a constrained tumor transform, picks the patient's p-th Canny
threshold pair, and writes ``conditioning.png``, ``tumor_mask.png``, and
``meta.txt`` per case. Per-case failures are recorded in the summary and do
not abort the batch. Output bytes depend only on (config, seed), never on
worker count or scheduling: all shared inputs are computed up front and each
worker writes only inside its own case directory.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import compose, edge_detect, fid_eval, imaging, manifest, mask_transform, seeding
from .errors import MixedInputError, ParseError, PipelineError

EDGE_SOURCES = ("t1_arterial", "t1_portal", "t2")

CONDITIONING_NAME = "conditioning.png"
TUMOR_MASK_NAME = "tumor_mask.png"
META_NAME = "meta.txt"
SUMMARY_NAME = "summary.txt"


@dataclass(frozen=True)
class PipelineConfig:
    manifest_path: str = "manifest.tsv"
    output_dir: str = "out"
    plan: manifest.GenerationPlan = field(default_factory=manifest.GenerationPlan)
    ranges: mask_transform.TransformRanges = field(
        default_factory=mask_transform.TransformRanges)
    region: mask_transform.AnatomicalRegion = field(
        default_factory=mask_transform.AnatomicalRegion)
    canny_sigma: float = edge_detect.DEFAULT_SIGMA
    min_tumor_area: int = manifest.DEFAULT_MIN_TUMOR_AREA
    edge_source: str = "t1_arterial"
    threads: int = 0

    def __post_init__(self):
        if self.edge_source not in EDGE_SOURCES:
            raise ValueError(f"edge_source must be one of {EDGE_SOURCES}")
        if self.min_tumor_area < 1:
            raise ValueError("min_tumor_area must be >= 1")


_CONFIG_KEYS = {
    "manifest": str,
    "output_dir": str,
    "edge_source": str,
    "canny_sigma": float,
    "min_tumor_area": int,
    "threads": int,
    "plan.master_seed": int,
    "plan.s_per_patient": int,
    "plan.p_per_patient": int,
    "plan.target_cases": int,
    "plan.working_size": int,
    "ranges.zoom_min": float,
    "ranges.zoom_max": float,
    "ranges.rotation_max": float,
    "ranges.allow_flip_h": int,
    "ranges.allow_flip_v": int,
    "ranges.translate_max": int,
    "region.x_min": float,
    "region.x_max": float,
    "region.y_min": float,
    "region.y_max": float,
}


def load_config(path: str | os.PathLike) -> PipelineConfig:
    """Parse the flat key=value config format (dotted section prefixes, # comments)."""
    raw: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
            raw[key] = value.strip()
    base = os.path.dirname(os.path.abspath(path))

    def get(key, default):
        if key not in raw:
            return default
        try:
            return _CONFIG_KEYS[key](raw[key])
        except ValueError as e:
            raise ParseError(f"{path}: bad value for {key}: {e}") from e

    def get_path(key, default):
        value = raw.get(key, default)
        return value if os.path.isabs(value) else os.path.normpath(os.path.join(base, value))

    try:
        plan = manifest.GenerationPlan(
            master_seed=get("plan.master_seed", 0),
            s_per_patient=get("plan.s_per_patient", 4),
            p_per_patient=get("plan.p_per_patient", 3),
            target_cases=get("plan.target_cases", 1000),
            working_size=get("plan.working_size", manifest.DEFAULT_WORKING_SIZE),
        )
        ranges = mask_transform.TransformRanges(
            zoom_min=get("ranges.zoom_min", 0.8),
            zoom_max=get("ranges.zoom_max", 1.2),
            rotation_max=get("ranges.rotation_max", 15.0),
            allow_flip_h=bool(get("ranges.allow_flip_h", 1)),
            allow_flip_v=bool(get("ranges.allow_flip_v", 0)),
            translate_max=get("ranges.translate_max", 60),
        )
        region = mask_transform.AnatomicalRegion(
            x_min=get("region.x_min", 0.08),
            x_max=get("region.x_max", 0.55),
            y_min=get("region.y_min", 0.15),
            y_max=get("region.y_max", 0.65),
        )
        return PipelineConfig(
            manifest_path=get_path("manifest", "manifest.tsv"),
            output_dir=get_path("output_dir", "out"),
            plan=plan,
            ranges=ranges,
            region=region,
            canny_sigma=get("canny_sigma", edge_detect.DEFAULT_SIGMA),
            min_tumor_area=get("min_tumor_area", manifest.DEFAULT_MIN_TUMOR_AREA),
            edge_source=get("edge_source", "t1_arterial"),
            threads=get("threads", 0),
        )
    except ValueError as e:
        raise ParseError(f"{path}: {e}") from e


@dataclass
class Stage1Summary:
    written: int = 0
    failed: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)

    def write(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"written={self.written}\n")
            fh.write(f"failed={self.failed}\n")
            for cid, reason in self.failures:
                fh.write(f"failed_case={cid}:{reason}\n")


@dataclass
class _PatientData:
    """Per-patient inputs shared read-only by all of that patient's cases."""

    record: manifest.PatientRecord
    tumor: imaging.BinaryMask
    liver: imaging.BinaryMask
    thresholds: list[edge_detect.ThresholdPair]
    edge_maps: list[edge_detect.EdgeMap]


def _prepare_patient(rec: manifest.PatientRecord, config: PipelineConfig,
                     m: int) -> _PatientData:
    size = config.plan.working_size
    tumor = imaging.resize_mask(imaging.load_png(rec.tumor_mask, as_mask=True), size, size)
    liver = imaging.resize_mask(imaging.load_png(rec.liver_mask, as_mask=True), size, size)
    source = imaging.resize(imaging.load_png(rec.acquisition_path(config.edge_source)),
                            size, size, mode="bilinear")
    rng = seeding.patient_rng(config.plan.master_seed, m)
    thresholds = edge_detect.sample_thresholds(rng, config.plan.p_per_patient)
    edge_maps = [edge_detect.canny(source, pair, sigma=config.canny_sigma)
                 for pair in thresholds]
    return _PatientData(rec, tumor, liver, thresholds, edge_maps)


def _run_case(case_index: int, assignment: tuple[int, int, int],
              patient: _PatientData, config: PipelineConfig) -> tuple[str, str | None]:
    m, s, p = assignment
    cid = manifest.case_id(m, s, p)
    seed = seeding.derive_seed(config.plan.master_seed, seeding.STREAM_CASE, case_index)
    rng = np.random.default_rng(seed)
    try:
        spec, moved = mask_transform.sample_constrained(
            rng, patient.tumor, config.ranges, config.region, patient.liver,
            min_overlap=config.min_tumor_area)
        intersection = compose.intersect(moved, patient.liver)
        conditioning = compose.overlay(intersection, patient.edge_maps[p])
    except PipelineError as e:
        return cid, f"{type(e).__name__}: {e}"
    pair = patient.thresholds[p]
    case_dir = os.path.join(config.output_dir, cid)
    os.makedirs(case_dir, exist_ok=True)
    imaging.save_png(conditioning.to_gray(), os.path.join(case_dir, CONDITIONING_NAME))
    imaging.save_png(intersection, os.path.join(case_dir, TUMOR_MASK_NAME))
    record = manifest.SyntheticCaseRecord(
        case_id=cid, source_patient=patient.record.id, transform=spec,
        low=pair.low, high=pair.high,
        conditioning=os.path.join(case_dir, CONDITIONING_NAME),
        tumor_mask_out=os.path.join(case_dir, TUMOR_MASK_NAME))
    manifest.write_meta(os.path.join(case_dir, META_NAME), record, seed)
    return cid, None


def run_stage1(config: PipelineConfig) -> Stage1Summary:
    """Generate every planned case; returns and persists the batch summary."""
    patients = manifest.load_manifest(config.manifest_path,
                                      working_size=config.plan.working_size,
                                      min_tumor_area=config.min_tumor_area)
    assignments = manifest.expand_plan(patients, config.plan)
    needed = sorted({m for m, _, _ in assignments})
    data = {m: _prepare_patient(patients[m], config, m) for m in needed}
    os.makedirs(config.output_dir, exist_ok=True)
    workers = config.threads if config.threads > 0 else (os.cpu_count() or 1)
    summary = Stage1Summary()
    if workers == 1:
        results = [_run_case(i, a, data[a[0]], config)
                   for i, a in enumerate(assignments)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda ia: _run_case(ia[0], ia[1], data[ia[1][0]], config),
                enumerate(assignments)))
    for cid, error in results:
        if error is None:
            summary.written += 1
        else:
            summary.failed += 1
            summary.failures.append((cid, error))
    summary.write(os.path.join(config.output_dir, SUMMARY_NAME))
    return summary


@dataclass
class VerifyReport:
    checked: int = 0
    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify(output_dir: str | os.PathLike, config: PipelineConfig) -> VerifyReport:
    """Re-check every case directory against the pipeline invariants:
    pixel alphabet, mask/conditioning consistency, centroid-in-region, and
    bit-exact reproducibility of the mask from the recorded transform."""
    patients = {rec.id: rec
                for rec in manifest.load_manifest(config.manifest_path,
                                                  working_size=config.plan.working_size,
                                                  min_tumor_area=config.min_tumor_area)}
    size = config.plan.working_size
    mask_cache: dict[str, tuple[imaging.BinaryMask, imaging.BinaryMask]] = {}
    report = VerifyReport()
    case_dirs = sorted(d for d in os.listdir(output_dir)
                       if os.path.isdir(os.path.join(output_dir, d)))
    for cid in case_dirs:
        case_dir = os.path.join(output_dir, cid)
        try:
            _verify_case(case_dir, patients, mask_cache, size, config, report)
            report.checked += 1
        except PipelineError as e:
            report.violations.append((cid, f"{type(e).__name__}: {e}"))
        except FileNotFoundError as e:
            report.violations.append((cid, f"incomplete case: {e}"))
    return report


def _verify_case(case_dir, patients, mask_cache, size, config, report) -> None:
    cid = os.path.basename(case_dir)
    cond = imaging.load_png(os.path.join(case_dir, CONDITIONING_NAME))
    stored = imaging.load_png(os.path.join(case_dir, TUMOR_MASK_NAME), as_mask=True)
    meta = manifest.read_meta(os.path.join(case_dir, META_NAME))

    alphabet = set(np.unique(cond.pixels))
    if not alphabet.issubset({0, compose.TUMOR_VALUE, compose.EDGE_VALUE}):
        report.violations.append((cid, f"conditioning alphabet {sorted(alphabet)}"))
        return
    tumor_from_cond = cond.pixels == compose.TUMOR_VALUE
    if not np.array_equal(tumor_from_cond, stored.pixels):
        report.violations.append((cid, "tumor_mask.png differs from conditioning 128-set"))
        return

    cx, cy = mask_transform.centroid(stored)
    if not config.region.contains(cx, cy, stored.width, stored.height):
        report.violations.append((cid, f"centroid ({cx:.2f}, {cy:.2f}) outside region"))
        return

    pid = meta["source_patient"]
    if pid not in patients:
        report.violations.append((cid, f"unknown source patient {pid!r}"))
        return
    if pid not in mask_cache:
        rec = patients[pid]
        mask_cache[pid] = (
            imaging.resize_mask(imaging.load_png(rec.tumor_mask, as_mask=True), size, size),
            imaging.resize_mask(imaging.load_png(rec.liver_mask, as_mask=True), size, size))
    tumor, liver = mask_cache[pid]
    spec = manifest.meta_transform(meta)
    reproduced = compose.intersect(mask_transform.apply_transform(tumor, spec), liver)
    if not np.array_equal(reproduced.pixels, stored.pixels):
        report.violations.append((cid, "recorded transform does not reproduce tumor_mask"))


def _embeddings_from_path(path: str, surrogate: bool) -> fid_eval.EmbeddingSet:
    if os.path.isfile(path):
        return fid_eval.load_emb1(path)
    if os.path.isdir(path):
        if not surrogate:
            raise MixedInputError(
                f"{path} is a directory; pass --surrogate or point at an EMB1 file")
        names = sorted(n for n in os.listdir(path) if n.lower().endswith(".png"))
        if not names:
            raise MixedInputError(f"{path}: no PNG files found")
        rows = [fid_eval.surrogate_embed(imaging.load_png(os.path.join(path, n)))
                for n in names]
        return fid_eval.EmbeddingSet(np.stack(rows))
    raise FileNotFoundError(path)


def fid_command(real: str, fake: str, surrogate: bool = False) -> str:
    """Load/compute both embedding sets and format the FID report."""
    real_set = _embeddings_from_path(real, surrogate)
    fake_set = _embeddings_from_path(fake, surrogate)
    if real_set.d != fake_set.d:
        raise MixedInputError(
            f"embedding dimensions differ: real d={real_set.d}, fake d={fake_set.d}")
    score = fid_eval.fid(real_set, fake_set)
    return (f"FID = {score:.2f}\n"
            f"real: n={real_set.n}, d={real_set.d}\n"
            f"fake: n={fake_set.n}, d={fake_set.d}")


def with_overrides(config: PipelineConfig, seed: int | None = None,
                   out: str | None = None, threads: int | None = None) -> PipelineConfig:
    """Apply CLI flag overrides on top of a parsed config."""
    if seed is not None:
        config = replace(config, plan=replace(config.plan, master_seed=seed))
    if out is not None:
        config = replace(config, output_dir=out)
    if threads is not None:
        config = replace(config, threads=threads)
    return config
