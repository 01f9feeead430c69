import os

import numpy as np
import pytest
from PIL import Image

from liversynth import imaging
from liversynth.errors import DecodeError

from oracles import resize_bilinear_scalar, resize_nearest_scalar


def test_load_zero_image(tmp_path):
    path = tmp_path / "z.png"
    imaging.save_png(imaging.GrayImage(np.zeros((4, 4), np.uint8)), path)
    img = imaging.load_png(path)
    assert isinstance(img, imaging.GrayImage)
    assert img.width == img.height == 4
    assert not img.pixels.any()


def test_mask_threshold_rule(tmp_path):
    path = tmp_path / "m.png"
    arr = np.array([[0, 127], [128, 255]], np.uint8)
    imaging.save_png(imaging.GrayImage(arr), path)
    mask = imaging.load_png(path, as_mask=True)
    assert mask.pixels.tolist() == [[False, False], [True, True]]


def test_16bit_rescale(tmp_path):
    path = tmp_path / "w.png"
    arr16 = np.array([[0, 257], [32896, 65535]], dtype=np.uint16)
    Image.fromarray(arr16).save(path)
    img = imaging.load_png(path)
    assert img.pixels.tolist() == [[0, 1], [128, 255]]


def test_rgb_luma(tmp_path):
    path = tmp_path / "c.png"
    arr = np.zeros((1, 3, 3), np.uint8)
    arr[0, 0] = (255, 0, 0)
    arr[0, 1] = (0, 255, 0)
    arr[0, 2] = (0, 0, 255)
    Image.fromarray(arr, mode="RGB").save(path)
    img = imaging.load_png(path)
    assert img.pixels.tolist() == [[(77 * 255) >> 8, (150 * 255) >> 8, (29 * 255) >> 8]]


def test_paletted_png(tmp_path):
    path = tmp_path / "p.png"
    Image.fromarray(np.array([[0, 1]], np.uint8), mode="P").convert("P").save(path)
    img = imaging.load_png(path)
    assert img.width == 2


def test_round_trip_random(tmp_path):
    rng = np.random.default_rng(7)
    img = imaging.GrayImage(rng.integers(0, 256, (256, 256)).astype(np.uint8))
    path = tmp_path / "r.png"
    imaging.save_png(img, path)
    assert imaging.load_png(path) == img


def test_mask_saved_as_0_255(tmp_path):
    m = np.zeros((5, 5), bool)
    m[2, 3] = True
    path = tmp_path / "one.png"
    imaging.save_png(imaging.BinaryMask(m), path)
    loaded = imaging.load_png(path)
    assert np.count_nonzero(loaded.pixels == 255) == 1
    assert np.count_nonzero(loaded.pixels) == 1


def test_not_a_png(tmp_path):
    path = tmp_path / "bad.png"
    path.write_bytes(b"this is not an image")
    with pytest.raises(DecodeError):
        imaging.load_png(path)


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        imaging.load_png("/nonexistent/nope.png")


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_save_to_readonly_dir(tmp_path):
    ro = tmp_path / "ro"
    ro.mkdir()
    os.chmod(ro, 0o500)
    try:
        with pytest.raises(OSError):
            imaging.save_png(imaging.GrayImage(np.zeros((2, 2), np.uint8)),
                             ro / "x.png")
    finally:
        os.chmod(ro, 0o700)


def test_resize_identity():
    img = imaging.GrayImage(np.arange(16, dtype=np.uint8).reshape(4, 4))
    assert imaging.resize(img, 4, 4, "bilinear") == img
    assert imaging.resize(img, 4, 4, "nearest") == img


def test_resize_nearest_2x2_to_1x1():
    img = imaging.GrayImage(np.array([[10, 20], [30, 40]], np.uint8))
    out = imaging.resize(img, 1, 1, "nearest")
    assert out.pixels.tolist() == [[40]]


@pytest.mark.parametrize("mode", ["bilinear", "nearest"])
def test_resize_constant(mode):
    img = imaging.GrayImage(np.full((7, 5), 100, np.uint8))
    for w, h in [(1, 1), (3, 9), (16, 2)]:
        out = imaging.resize(img, w, h, mode)
        assert (out.pixels == 100).all()


@pytest.mark.parametrize("mode,oracle", [
    ("nearest", resize_nearest_scalar),
    ("bilinear", resize_bilinear_scalar),
])
def test_resize_matches_scalar_oracle(mode, oracle):
    rng = np.random.default_rng(11)
    for _ in range(10):
        sw, sh = rng.integers(1, 12, 2)
        w, h = rng.integers(1, 12, 2)
        src = rng.integers(0, 256, (sh, sw)).astype(np.uint8)
        out = imaging.resize(imaging.GrayImage(src), int(w), int(h), mode)
        expected = oracle([list(map(int, row)) for row in src], int(w), int(h))
        assert out.pixels.tolist() == expected


def test_resize_mask_stays_binary():
    rng = np.random.default_rng(3)
    mask = imaging.BinaryMask(rng.random((31, 17)) > 0.5)
    out = imaging.resize_mask(mask, 9, 23)
    assert out.pixels.dtype == bool
    assert out.width == 9 and out.height == 23
