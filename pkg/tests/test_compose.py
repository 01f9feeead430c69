import numpy as np
import pytest

from liversynth import compose
from liversynth.edge_detect import EdgeMap
from liversynth.errors import DimensionMismatchError, EmptyTumorError
from liversynth.imaging import BinaryMask

from conftest import random_blob


def mask(size, box=None):
    m = np.zeros((size, size), bool)
    if box:
        x0, y0, x1, y1 = box
        m[y0:y1, x0:x1] = True
    return BinaryMask(m)


def edges_from(array):
    return EdgeMap(np.asarray(array, bool), low=30, high=120)


def test_intersect_disjoint():
    a = mask(64, (0, 0, 10, 10))
    b = mask(64, (20, 20, 30, 30))
    assert compose.intersect(a, b).area == 0


def test_intersect_absorption():
    liver = mask(64, (0, 0, 40, 40))
    tumor = mask(64, (5, 5, 15, 15))
    assert compose.intersect(tumor, liver) == tumor


def test_intersect_overlap_rectangle():
    tumor = mask(64, (0, 0, 10, 10))
    liver = mask(64, (5, 5, 15, 15))
    out = compose.intersect(tumor, liver)
    assert out.area == 25
    expected = mask(64, (5, 5, 10, 10))
    assert out == expected


def test_intersect_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        compose.intersect(mask(64), mask(32))


def test_intersect_algebra():
    rng = np.random.default_rng(1)
    full = BinaryMask(np.ones((32, 32), bool))
    empty = BinaryMask(np.zeros((32, 32), bool))
    for _ in range(20):
        a = random_blob(rng, 32, min_area=10)
        b = random_blob(rng, 32, min_area=10)
        c = random_blob(rng, 32, min_area=10)
        assert compose.intersect(a, b) == compose.intersect(b, a)
        assert (compose.intersect(compose.intersect(a, b), c)
                == compose.intersect(a, compose.intersect(b, c)))
        assert compose.intersect(a, a) == a
        assert compose.intersect(a, full) == a
        assert compose.intersect(a, empty) == empty
        assert compose.intersect(a, b).area <= min(a.area, b.area)


def test_overlay_single_tumor_pixel():
    inter = mask(8, (3, 3, 4, 4))
    out = compose.overlay(inter, edges_from(np.zeros((8, 8))))
    assert (out.pixels == 128).sum() == 1
    assert (out.pixels == 255).sum() == 0


def test_overlay_tumor_precedence():
    inter = mask(8, (3, 3, 4, 4))
    e = np.zeros((8, 8), bool)
    e[3, 3] = True
    out = compose.overlay(inter, edges_from(e))
    assert out.pixels[3, 3] == 128


def test_overlay_pixel_counts():
    e = np.zeros((32, 32), bool)
    e.ravel()[:40] = True
    t = np.zeros((32, 32), bool)
    t.ravel()[35:60] = True  # 25 tumor pixels, 5 overlapping the edges
    out = compose.overlay(BinaryMask(t), edges_from(e))
    assert (out.pixels == 255).sum() == 35
    assert (out.pixels == 128).sum() == 25


def test_overlay_partitions_exactly():
    rng = np.random.default_rng(2)
    for _ in range(20):
        t = random_blob(rng, 32, min_area=10)
        e = edges_from(rng.random((32, 32)) > 0.8)
        out = compose.overlay(t, e)
        assert np.array_equal(out.pixels == 128, t.pixels)
        assert np.array_equal(out.pixels == 255, e.pixels & ~t.pixels)
        assert out.tumor_mask() == t


def test_overlay_empty_tumor_rejected():
    with pytest.raises(EmptyTumorError):
        compose.overlay(mask(8), edges_from(np.zeros((8, 8))))


def test_overlay_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        compose.overlay(mask(8, (1, 1, 2, 2)), edges_from(np.zeros((9, 9))))
