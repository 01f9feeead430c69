"""Feature-embedding export in the EMB1 interchange format.

Each grayscale PNG is replicated to three channels, resized to the network's
224x224 input, and passed through a ResNet-50's penultimate global-average
pooled features (d = 2048). Pretrained ImageNet weights are used when they
are available locally; otherwise the network falls back to a fixed-seed
random initialization, which keeps the export deterministic and the format
contract intact (the features are then only useful for relative
comparisons, and the fallback is reported).
"""

from __future__ import annotations

import os
import struct

import numpy as np
import torch
from torchvision.models import resnet50

from .data import load_gray
from .errors import EmptyDirectoryError

EMB1_MAGIC = b"EMB1"
FEATURE_DIM = 2048
INPUT_SIZE = 224
FALLBACK_SEED = 0x5EED


def _build_extractor(log=print) -> torch.nn.Module:
    try:
        from torchvision.models import ResNet50_Weights
        model = resnet50(weights=ResNet50_Weights.IMAGENET1K_V1)
    except Exception:
        log("warning: pretrained weights unavailable; "
            "using fixed-seed random initialization")
        torch.manual_seed(FALLBACK_SEED)
        model = resnet50(weights=None)
    model.fc = torch.nn.Identity()  # expose the 2048-d pooled features
    model.eval()
    return model


def write_emb1(values: np.ndarray, path: str) -> None:
    n, d = values.shape
    with open(path, "wb") as fh:
        fh.write(EMB1_MAGIC)
        fh.write(struct.pack("<II", n, d))
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def embed(image_dir: str, out_path: str, log=print) -> np.ndarray:
    """Embed every PNG under image_dir (sorted by file path) into an EMB1 file.

    Decode failures are fatal: an embedding set must cover the whole directory.
    """
    names = sorted(n for n in os.listdir(image_dir) if n.lower().endswith(".png"))
    if not names:
        raise EmptyDirectoryError(f"{image_dir}: no PNG files")
    model = _build_extractor(log=log)
    rows = []
    with torch.no_grad():
        for name in names:
            arr = load_gray(os.path.join(image_dir, name), size=INPUT_SIZE)
            x = torch.from_numpy(arr.astype(np.float32) / 255.0)
            x = x.unsqueeze(0).repeat(3, 1, 1).unsqueeze(0)
            rows.append(model(x).squeeze(0).double().numpy())
    values = np.stack(rows)
    assert values.shape == (len(names), FEATURE_DIM)
    write_emb1(values, out_path)
    return values
