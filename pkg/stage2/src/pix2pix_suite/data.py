"""Pairing loader: Stage-1 conditioning images matched with real acquisitions.

Reads the tab-separated dataset manifest and the Stage-1 output tree
(``<case_id>/conditioning.png`` + ``meta.txt``) produced by the core
pipeline. Every conditioning image built from patient m is paired with
patient m's real image of the chosen acquisition; all (s, p) variants of a
patient are used as training pairs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import torch
from PIL import Image

from .errors import EmptyDatasetError, ShapeMismatchError

CONDITIONING_ALPHABET = frozenset({0, 128, 255})
ACQUISITION_COLUMNS = {"t1_arterial": 1, "t1_portal": 2, "t2": 3}


def load_gray(path: str, size: int | None = None) -> np.ndarray:
    """8-bit grayscale array, optionally resized (bilinear) to size x size."""
    with Image.open(path) as img:
        img = img.convert("L")
        if size is not None and img.size != (size, size):
            img = img.resize((size, size), Image.BILINEAR)
        return np.asarray(img, dtype=np.uint8)


def save_gray(array: np.ndarray, path: str) -> None:
    Image.fromarray(array.astype(np.uint8), mode="L").save(path, format="PNG")


def to_tensor(array: np.ndarray) -> torch.Tensor:
    """uint8 [0,255] -> float32 [-1,1], shape (1, H, W)."""
    return torch.from_numpy(array.astype(np.float32) / 127.5 - 1.0).unsqueeze(0)


def from_tensor(tensor: torch.Tensor) -> np.ndarray:
    """float [-1,1] (1, H, W) -> uint8 [0,255]."""
    arr = (tensor.detach().squeeze(0).clamp(-1.0, 1.0).numpy() + 1.0) * 127.5
    return np.floor(arr + 0.5).clip(0, 255).astype(np.uint8)


def load_conditioning(path: str, size: int) -> np.ndarray:
    """Load a conditioning image and enforce its {0, 128, 255} contract."""
    arr = load_gray(path)
    values = set(np.unique(arr))
    if not values <= CONDITIONING_ALPHABET:
        bad = sorted(values - CONDITIONING_ALPHABET)
        raise ShapeMismatchError(
            f"{path}: conditioning pixels {bad} outside {{0, 128, 255}}")
    if arr.shape != (size, size):
        # nearest keeps the three-level alphabet intact
        with Image.open(path) as img:
            arr = np.asarray(img.convert("L").resize((size, size), Image.NEAREST))
    return arr


def load_manifest_acquisitions(manifest_path: str, acquisition: str) -> dict[str, str]:
    """Map patient id -> path of the requested acquisition."""
    column = ACQUISITION_COLUMNS[acquisition]
    base = os.path.dirname(os.path.abspath(manifest_path))
    out: dict[str, str] = {}
    with open(manifest_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 6:
                raise ShapeMismatchError(
                    f"{manifest_path}: expected 6 tab-separated fields")
            path = parts[column]
            if not os.path.isabs(path):
                path = os.path.normpath(os.path.join(base, path))
            out[parts[0]] = path
    if not out:
        raise EmptyDatasetError(f"{manifest_path}: no records")
    return out


def _case_source_patient(meta_path: str) -> str:
    with open(meta_path, encoding="utf-8") as fh:
        for line in fh:
            key, _, value = line.strip().partition("=")
            if key == "source_patient":
                return value
    raise ShapeMismatchError(f"{meta_path}: missing source_patient")


def list_case_dirs(stage1_dir: str) -> list[str]:
    dirs = sorted(d for d in os.listdir(stage1_dir)
                  if os.path.isdir(os.path.join(stage1_dir, d)))
    return [os.path.join(stage1_dir, d) for d in dirs]


@dataclass
class PairedDataset:
    """In-memory (conditioning, target) tensor pairs, ordered by case id."""

    conditions: list[torch.Tensor]
    targets: list[torch.Tensor]
    case_ids: list[str]

    def __len__(self) -> int:
        return len(self.conditions)

    def batches(self, batch_size: int):
        """Sequential batching; a batch_size above len() yields one full batch."""
        step = min(batch_size, len(self))
        for start in range(0, len(self), step):
            yield (torch.stack(self.conditions[start:start + step]),
                   torch.stack(self.targets[start:start + step]))


def build_dataset(manifest_path: str, stage1_dir: str, acquisition: str,
                  image_size: int) -> PairedDataset:
    acquisitions = load_manifest_acquisitions(manifest_path, acquisition)
    conditions, targets, case_ids = [], [], []
    target_cache: dict[str, torch.Tensor] = {}
    for case_dir in list_case_dirs(stage1_dir):
        cond_path = os.path.join(case_dir, "conditioning.png")
        meta_path = os.path.join(case_dir, "meta.txt")
        if not (os.path.exists(cond_path) and os.path.exists(meta_path)):
            continue
        patient = _case_source_patient(meta_path)
        if patient not in acquisitions:
            raise ShapeMismatchError(
                f"{case_dir}: source patient {patient!r} not in manifest")
        if patient not in target_cache:
            target_cache[patient] = to_tensor(
                load_gray(acquisitions[patient], size=image_size))
        conditions.append(to_tensor(load_conditioning(cond_path, image_size)))
        targets.append(target_cache[patient])
        case_ids.append(os.path.basename(case_dir))
    if not conditions:
        raise EmptyDatasetError(f"no usable case directories under {stage1_dir}")
    return PairedDataset(conditions, targets, case_ids)
