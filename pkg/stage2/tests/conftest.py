import os

import numpy as np
import pytest
from PIL import Image


def write_png(path, array):
    os.makedirs(os.path.dirname(str(path)), exist_ok=True)
    Image.fromarray(np.asarray(array, dtype=np.uint8), mode="L").save(path)


def make_stage1_tree(root, n_cases=3, n_patients=2, size=64, seed=0):
    """Toy Stage-1 output tree + manifest in the core pipeline's file formats."""
    rng = np.random.default_rng(seed)
    root = str(root)
    data_dir = os.path.join(root, "data")
    stage1 = os.path.join(root, "stage1")
    lines = []
    ys, xs = np.mgrid[0:size, 0:size]
    for m in range(n_patients):
        row = [f"p{m:02d}"]
        for k, name in enumerate(("t1_arterial", "t1_portal", "t2")):
            path = os.path.join(data_dir, f"p{m:02d}_{name}.png")
            # smooth structured pattern: learnable by a small generator
            phase = m * 0.7 + k * 1.3
            img = 127.5 + 90.0 * np.sin(2 * np.pi * xs / size + phase) \
                * np.cos(2 * np.pi * ys / size - phase)
            write_png(path, np.clip(img, 0, 255))
            row.append(path)
        for name in ("tumor", "liver"):
            path = os.path.join(data_dir, f"p{m:02d}_{name}.png")
            mask = np.zeros((size, size), np.uint8)
            mask[size // 4:size // 2, size // 4:size // 2] = 255
            write_png(path, mask)
            row.append(path)
        lines.append("\t".join(row))
    manifest_path = os.path.join(root, "manifest.tsv")
    with open(manifest_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

    for i in range(n_cases):
        m = i % n_patients
        case_dir = os.path.join(stage1, f"case_{m:04d}_{i:03d}_000")
        cond = np.zeros((size, size), np.uint8)
        cond[rng.random((size, size)) > 0.9] = 255
        y0, x0 = rng.integers(8, size - 16, 2)
        cond[y0:y0 + 8, x0:x0 + 8] = 128
        write_png(os.path.join(case_dir, "conditioning.png"), cond)
        write_png(os.path.join(case_dir, "tumor_mask.png"),
                  np.where(cond == 128, 255, 0))
        with open(os.path.join(case_dir, "meta.txt"), "w") as fh:
            fh.write(f"source_patient=p{m:02d}\nseed=1\nzoom=1.0\nrotation=0.0\n"
                     "flip_h=0\nflip_v=0\ndx=0\ndy=0\nlow=40\nhigh=90\n")
    return manifest_path, stage1


@pytest.fixture
def stage1_tree(tmp_path):
    return make_stage1_tree(tmp_path)
