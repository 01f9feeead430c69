"""Deterministic per-case seed derivation.

Each case (and each patient's threshold stream) gets its own generator seed
derived from the master seed with a SplitMix64-style finalizer, so cases can
run on any number of workers in any order and still produce identical bytes.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4B7C15

STREAM_CASE = 0
STREAM_THRESHOLDS = 1


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D49BBB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, stream: int, index: int) -> int:
    """Seed for `index` within `stream`. The mix input is distinct for every
    (stream, index) pair (streams occupy the odd/even lanes), and the
    finalizer is a bijection, so derived seeds never collide within a run."""
    return _mix64(master_seed + _GOLDEN * (2 * index + stream + 1))


def case_rng(master_seed: int, case_index: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, STREAM_CASE, case_index))


def patient_rng(master_seed: int, patient_index: int) -> np.random.Generator:
    return np.random.default_rng(
        derive_seed(master_seed, STREAM_THRESHOLDS, patient_index))
