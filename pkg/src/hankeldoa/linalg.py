"""Thin SVD utilities shared by the completion solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SVDFactors:
    """Compact SVD x = u @ diag(sigma) @ v.conj().T with sigma descending."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.conj().T


def svd(x: np.ndarray) -> SVDFactors:
    u, s, vh = np.linalg.svd(np.asarray(x), full_matrices=False)
    return SVDFactors(u, s, vh.conj().T)


def shrink(x: np.ndarray, tau: float) -> np.ndarray:
    """Singular value soft-thresholding: subtract tau from every singular value,
    clip at zero, reconstruct."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    f = svd(x)
    kept = np.maximum(f.sigma - tau, 0.0)
    return (f.u * kept) @ f.v.conj().T
