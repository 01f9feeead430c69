import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from liversynth import imaging


def disk(size, cx, cy, r):
    ys, xs = np.mgrid[0:size, 0:size]
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r


def make_toy_dataset(root, n_patients=3, size=64, seed=1234):
    """Write a small synthetic dataset + manifest and return the manifest path.

    Each patient gets three structured grayscale acquisitions, a liver disk
    covering the default anatomical region, and a small tumor disk inside it.
    """
    rng = np.random.default_rng(seed)
    root = str(root)
    os.makedirs(root, exist_ok=True)
    lines = []
    for m in range(n_patients):
        pdir = os.path.join(root, f"p{m:02d}")
        os.makedirs(pdir, exist_ok=True)
        liver = disk(size, size * 0.32, size * 0.40, size * 0.22)
        tumor = disk(size, size * 0.32 + m, size * 0.40 - m, size * 0.07)
        paths = {}
        for name in ("t1_arterial", "t1_portal", "t2"):
            base = rng.integers(40, 200, size=(size, size)).astype(np.uint8)
            # smooth noise + a bright liver region so Canny has real structure
            img = (base // 3 + 40).astype(np.uint8)
            img[liver] = np.minimum(img[liver].astype(int) + 80, 255).astype(np.uint8)
            path = os.path.join(pdir, f"{name}.png")
            imaging.save_png(imaging.GrayImage(img), path)
            paths[name] = path
        tpath = os.path.join(pdir, "tumor.png")
        lpath = os.path.join(pdir, "liver.png")
        imaging.save_png(imaging.BinaryMask(tumor), tpath)
        imaging.save_png(imaging.BinaryMask(liver), lpath)
        lines.append("\t".join([f"p{m:02d}", paths["t1_arterial"], paths["t1_portal"],
                                paths["t2"], tpath, lpath]))
    manifest_path = os.path.join(root, "manifest.tsv")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write("# toy dataset\n")
        fh.write("\n".join(lines) + "\n")
    return manifest_path


def write_toy_config(path, manifest_path, out_dir, size=64, seed=0, target=24,
                     s_per_patient=4, p_per_patient=2, threads=0):
    """Config tuned for 64x64 toy data (translation range scaled down)."""
    text = f"""
manifest={manifest_path}
output_dir={out_dir}
threads={threads}
plan.master_seed={seed}
plan.s_per_patient={s_per_patient}
plan.p_per_patient={p_per_patient}
plan.target_cases={target}
plan.working_size={size}
ranges.translate_max={size // 4}
min_tumor_area=10
"""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text.strip() + "\n")
    return str(path)


@pytest.fixture
def toy_dataset(tmp_path):
    return make_toy_dataset(tmp_path / "data")


def random_blob(rng, size, min_area=100):
    """Random filled ellipse-ish blob with at least min_area pixels."""
    while True:
        cx = rng.uniform(size * 0.3, size * 0.7)
        cy = rng.uniform(size * 0.3, size * 0.7)
        rx = rng.uniform(size * 0.08, size * 0.2)
        ry = rng.uniform(size * 0.08, size * 0.2)
        ys, xs = np.mgrid[0:size, 0:size]
        blob = ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0
        if blob.sum() >= min_area:
            return imaging.BinaryMask(blob)
