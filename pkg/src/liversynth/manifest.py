"""Dataset manifest, generation-plan arithmetic, and case metadata files.

The manifest is tab-separated UTF-8, one patient per line::

    id  t1_arterial  t1_portal  t2  tumor_mask  liver_mask

with ``#`` comments and blank lines allowed. Paths are resolved relative to
the manifest file. Case output lives in ``out/<case_id>/`` with
``conditioning.png``, ``tumor_mask.png`` and a flat ``meta.txt``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .compose import intersect
from .errors import ParseError, PlanInfeasibleError, ValidationError
from .imaging import load_png, resize_mask
from .mask_transform import TransformSpec

MANIFEST_FIELDS = ("id", "t1_arterial", "t1_portal", "t2", "tumor_mask", "liver_mask")
META_KEYS = ("source_patient", "seed", "zoom", "rotation", "flip_h", "flip_v",
             "dx", "dy", "low", "high")

DEFAULT_WORKING_SIZE = 256
DEFAULT_MIN_TUMOR_AREA = 30


@dataclass(frozen=True)
class PatientRecord:
    """One dataset row: three acquisitions plus tumor and liver masks."""

    id: str
    t1_arterial: str
    t1_portal: str
    t2: str
    tumor_mask: str
    liver_mask: str

    def acquisition_path(self, name: str) -> str:
        if name not in ("t1_arterial", "t1_portal", "t2"):
            raise ValueError(f"unknown acquisition {name!r}")
        return getattr(self, name)


@dataclass(frozen=True)
class GenerationPlan:
    """Expansion of M patients via S transforms and P threshold draws."""

    master_seed: int = 0
    s_per_patient: int = 4
    p_per_patient: int = 3
    target_cases: int = 1000
    working_size: int = DEFAULT_WORKING_SIZE

    def __post_init__(self):
        if self.s_per_patient < 1 or self.p_per_patient < 1 or self.target_cases < 1:
            raise ValueError("S, P, and target_cases must be >= 1")
        if self.working_size < 5:
            raise ValueError("working_size must be >= 5")

    def validate(self, patient_count: int) -> None:
        capacity = patient_count * self.s_per_patient * self.p_per_patient
        if capacity < self.target_cases:
            raise PlanInfeasibleError(
                f"M*S*P = {capacity} < target_cases = {self.target_cases}")


@dataclass
class SyntheticCaseRecord:
    """Book-keeping for one written case directory."""

    case_id: str
    source_patient: str
    transform: TransformSpec
    low: int
    high: int
    conditioning: str
    tumor_mask_out: str
    outputs: dict[str, str] = field(default_factory=dict)


def case_id(m: int, s: int, p: int) -> str:
    return f"case_{m:04d}_{s:03d}_{p:03d}"


def load_manifest(path: str | os.PathLike,
                  working_size: int = DEFAULT_WORKING_SIZE,
                  min_tumor_area: int = DEFAULT_MIN_TUMOR_AREA) -> list[PatientRecord]:
    """Parse and validate a manifest. Any invalid record aborts the load."""
    base = os.path.dirname(os.path.abspath(path))
    records: list[PatientRecord] = []
    seen_ids: set[str] = set()
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except FileNotFoundError:
        raise
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != len(MANIFEST_FIELDS):
            raise ParseError(
                f"{path}:{lineno}: expected {len(MANIFEST_FIELDS)} tab-separated "
                f"fields, got {len(parts)}")
        rid = parts[0]
        if rid in seen_ids:
            raise ParseError(f"{path}:{lineno}: duplicate patient id {rid!r}")
        seen_ids.add(rid)
        paths = [p if os.path.isabs(p) else os.path.normpath(os.path.join(base, p))
                 for p in parts[1:]]
        records.append(PatientRecord(rid, *paths))
    if not records:
        raise ParseError(f"{path}: no records")
    for rec in records:
        _validate_record(rec, working_size, min_tumor_area)
    return records


def _validate_record(rec: PatientRecord, working_size: int, min_tumor_area: int) -> None:
    for name in ("t1_arterial", "t1_portal", "t2"):
        p = getattr(rec, name)
        try:
            load_png(p)
        except Exception as e:
            raise ValidationError(f"record {rec.id!r}: cannot load {name} ({e})") from e
    try:
        tumor = resize_mask(load_png(rec.tumor_mask, as_mask=True),
                            working_size, working_size)
        liver = resize_mask(load_png(rec.liver_mask, as_mask=True),
                            working_size, working_size)
    except Exception as e:
        raise ValidationError(f"record {rec.id!r}: cannot load masks ({e})") from e
    if tumor.area == 0:
        raise ValidationError(f"record {rec.id!r}: empty tumor mask")
    if liver.area == 0:
        raise ValidationError(f"record {rec.id!r}: empty liver mask")
    overlap = intersect(tumor, liver).area
    if overlap < min_tumor_area:
        raise ValidationError(
            f"record {rec.id!r}: tumor/liver overlap {overlap} px below "
            f"minimum {min_tumor_area}")


def expand_plan(patients: list[PatientRecord],
                plan: GenerationPlan) -> list[tuple[int, int, int]]:
    """Enumerate (m, s, p) case assignments, balanced so per-patient counts
    differ by at most one and earlier patients receive the extras."""
    m_count = len(patients)
    plan.validate(m_count)
    base = plan.target_cases // m_count
    extra = plan.target_cases % m_count
    s_n, p_n = plan.s_per_patient, plan.p_per_patient
    assignments: list[tuple[int, int, int]] = []
    for m in range(m_count):
        count = base + (1 if m < extra else 0)
        for k in range(count):
            assignments.append((m, k // p_n, k % p_n))
    return assignments


def write_meta(path: str | os.PathLike, record: SyntheticCaseRecord, seed: int) -> None:
    """Persist case metadata as flat key=value lines with the frozen key set."""
    t = record.transform
    values = {
        "source_patient": record.source_patient,
        "seed": str(seed),
        "zoom": repr(t.zoom),
        "rotation": repr(t.rotation),
        "flip_h": "1" if t.flip_h else "0",
        "flip_v": "1" if t.flip_v else "0",
        "dx": str(t.dx),
        "dy": str(t.dy),
        "low": str(record.low),
        "high": str(record.high),
    }
    with open(path, "w", encoding="utf-8") as fh:
        for key in META_KEYS:
            fh.write(f"{key}={values[key]}\n")


def read_meta(path: str | os.PathLike) -> dict[str, str]:
    """Parse a meta.txt file and check the frozen key set is complete."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key] = value
    missing = [k for k in META_KEYS if k not in values]
    if missing:
        raise ParseError(f"{path}: missing keys {missing}")
    return values


def meta_transform(values: dict[str, str]) -> TransformSpec:
    """Rebuild the TransformSpec recorded in a meta.txt (floats round-trip via repr)."""
    try:
        return TransformSpec(
            zoom=float(values["zoom"]),
            rotation=float(values["rotation"]),
            flip_h=values["flip_h"] == "1",
            flip_v=values["flip_v"] == "1",
            dx=int(values["dx"]),
            dy=int(values["dy"]),
        )
    except (KeyError, ValueError) as e:
        raise ParseError(f"invalid transform metadata: {e}") from e
