"""Frechet distance between Gaussian fits of image embeddings.

Implements the standard Frechet Inception Distance
``|mu_R - mu_F|^2 + Tr(S_R) + Tr(S_F) - 2 Tr((S_R S_F)^{1/2})`` with the
matrix square root taken via symmetric eigendecomposition. Also defines the
EMB1 on-disk embedding format and a deterministic surrogate feature
extractor (histogram + thumbnail) so the evaluator is usable without any
pretrained network.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmbeddingFormatError,
    NotPSDError,
    TooFewSamplesError,
)
from .imaging import GrayImage, resize

EMB1_MAGIC = b"EMB1"
SURROGATE_DIM = 128

# eigenvalues down to -1e-10 * trace are treated as rounding noise and clamped
PSD_TOLERANCE = 1e-10
FID_NEGATIVE_TOLERANCE = 1e-8

# inner-product eigenvalues below this fraction of the largest one are rounding
# noise of the two matrix multiplies; without the clamp, rank-deficient
# covariances (n << d) make fid(X, X) drift away from zero
RELATIVE_EIG_CLAMP = 1e-12


@dataclass(frozen=True)
class EmbeddingSet:
    """n x d matrix of 64-bit feature vectors, one row per image."""

    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("EmbeddingSet requires a 2-D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("embeddings must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class GaussianFit:
    mean: np.ndarray
    cov: np.ndarray


def fit_gaussian(embeddings: EmbeddingSet) -> GaussianFit:
    """Column means and unbiased (n-1) sample covariance, symmetrized."""
    if embeddings.n < 2:
        raise TooFewSamplesError(f"covariance needs >= 2 samples, got {embeddings.n}")
    mean = embeddings.values.mean(axis=0)
    cov = np.cov(embeddings.values, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    cov = (cov + cov.T) / 2.0
    return GaussianFit(mean=mean, cov=cov)


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition, clamping rounding noise."""
    sym = (matrix + matrix.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(sym)
    tol = PSD_TOLERANCE * max(abs(np.trace(sym)), 1.0)
    if eigvals.min() < -tol:
        raise NotPSDError(
            f"matrix has eigenvalue {eigvals.min():.3e} below tolerance {-tol:.3e}")
    eigvals = np.clip(eigvals, 0.0, None)
    return (eigvecs * np.sqrt(eigvals)) @ eigvecs.T


def sqrtm_trace(cov_a: np.ndarray, cov_b: np.ndarray) -> float:
    """Tr((A B)^{1/2}) computed as Tr((A^{1/2} B A^{1/2})^{1/2}).

    The inner matrix is symmetric PSD by construction, so both roots go
    through stable symmetric eigendecompositions.
    """
    if cov_a.shape != cov_b.shape or cov_a.shape[0] != cov_a.shape[1]:
        raise DimensionMismatchError(
            f"covariance shapes differ: {cov_a.shape} vs {cov_b.shape}")
    root_a = _psd_sqrt(cov_a)
    inner = root_a @ cov_b @ root_a
    eigvals = np.linalg.eigvalsh((inner + inner.T) / 2.0)
    tol = PSD_TOLERANCE * max(abs(np.trace(inner)), 1.0)
    if eigvals.min() < -tol:
        raise NotPSDError(
            f"product matrix eigenvalue {eigvals.min():.3e} below tolerance {-tol:.3e}")
    eigvals = np.clip(eigvals, 0.0, None)
    eigvals[eigvals < RELATIVE_EIG_CLAMP * eigvals.max()] = 0.0
    return float(np.sqrt(eigvals).sum())


def fid(real: EmbeddingSet, fake: EmbeddingSet) -> float:
    """Frechet distance between the Gaussian fits of two embedding sets."""
    if real.d != fake.d:
        raise DimensionMismatchError(f"feature dimensions differ: {real.d} vs {fake.d}")
    fit_r = fit_gaussian(real)
    fit_f = fit_gaussian(fake)
    diff = fit_r.mean - fit_f.mean
    score = (float(diff @ diff) + float(np.trace(fit_r.cov)) + float(np.trace(fit_f.cov))
             - 2.0 * sqrtm_trace(fit_r.cov, fit_f.cov))
    if score < 0.0:
        if score < -FID_NEGATIVE_TOLERANCE:
            raise NotPSDError(f"FID evaluated to {score}, beyond rounding tolerance")
        score = 0.0
    return score


def surrogate_embed(image: GrayImage) -> np.ndarray:
    """Deterministic 128-d stand-in feature vector: 64-bin normalized intensity
    histogram concatenated with the 8x8 nearest-resized thumbnail in [0, 1]."""
    hist = np.bincount((image.pixels // 4).ravel(), minlength=64).astype(np.float64)
    hist /= image.pixels.size
    thumb = resize(image, 8, 8, mode="nearest").pixels.astype(np.float64) / 255.0
    return np.concatenate([hist, thumb.ravel()])


def save_emb1(embeddings: EmbeddingSet, path: str | os.PathLike) -> None:
    """Write the EMB1 format: magic, u32 n, u32 d, then row-major little-endian f64."""
    with open(path, "wb") as fh:
        fh.write(EMB1_MAGIC)
        fh.write(struct.pack("<II", embeddings.n, embeddings.d))
        fh.write(embeddings.values.astype("<f8").tobytes())


def load_emb1(path: str | os.PathLike) -> EmbeddingSet:
    """Read an EMB1 file, rejecting bad magic, short headers, and truncated payloads."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12:
        raise EmbeddingFormatError(f"{path}: too short for an EMB1 header")
    if blob[:4] != EMB1_MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic {blob[:4]!r}, expected {EMB1_MAGIC!r}")
    n, d = struct.unpack("<II", blob[4:12])
    expected = 12 + 8 * n * d
    if len(blob) != expected:
        raise EmbeddingFormatError(
            f"{path}: expected {expected} bytes for n={n}, d={d}, got {len(blob)}")
    values = np.frombuffer(blob, dtype="<f8", offset=12).reshape(n, d)
    return EmbeddingSet(values.astype(np.float64))
