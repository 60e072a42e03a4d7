"""Hankel lifting of snapshots and the anti-diagonal bookkeeping around it.

A length-m vector y lifts to the n1 x n2 Hankel matrix H[i, j] = y[i + j]
(0-based) with n1 + n2 = m + 1.  Every cell on an anti-diagonal repeats the
same antenna value, so observation sets are tracked at cell granularity.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .signal import Snapshot, SnapshotKind


class CellSubset(str, Enum):
    OMEGA = "omega"
    OMEGA1 = "omega1"
    OMEGA2 = "omega2"


def hankel_shape(m: int) -> tuple[int, int]:
    """Split m + 1 as evenly as possible: square for odd m, near-square otherwise."""
    if m < 1:
        raise ValueError("m must be at least 1")
    n1 = (m + 1) // 2
    return n1, m + 1 - n1


@dataclass
class HankelView:
    """Hankel matrix plus boolean cell masks for the observed anti-diagonals.

    omega marks all observed cells; omega2 the multi-bit ones, omega1 the
    one-bit remainder (omega = omega1 | omega2, disjoint).
    """

    matrix: np.ndarray
    omega: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.complex128)
        if self.matrix.ndim != 2:
            raise ValueError("matrix must be 2-d")
        for name in ("omega", "omega1", "omega2"):
            arr = np.asarray(getattr(self, name), dtype=bool)
            if arr.shape != self.matrix.shape:
                raise ValueError(f"{name} mask shape must match the matrix")
            setattr(self, name, arr)
        if np.any(self.omega1 & self.omega2):
            raise ValueError("omega1 and omega2 must be disjoint")
        if np.any((self.omega1 | self.omega2) != self.omega):
            raise ValueError("omega must be the union of omega1 and omega2")

    @property
    def n1(self) -> int:
        return self.matrix.shape[0]

    @property
    def n2(self) -> int:
        return self.matrix.shape[1]

    @property
    def m(self) -> int:
        return self.n1 + self.n2 - 1

    def antenna_index(self, i: int, j: int) -> int:
        """0-based antenna feeding cell (i, j)."""
        return i + j


def antidiag_weights(m: int) -> np.ndarray:
    """Cell count of each anti-diagonal k = 1..m of the canonical lift of length m."""
    n1, n2 = hankel_shape(m)
    k = np.arange(1, m + 1)
    return np.minimum(np.minimum(k, m + 1 - k), min(n1, n2))


def lift(y: Snapshot, delta_indicator: np.ndarray | None = None) -> HankelView:
    """Lift a snapshot into its HankelView, deriving cell masks from the snapshot
    mask and the optional multi-bit indicator."""
    n1, n2 = hankel_shape(y.m)
    idx = np.add.outer(np.arange(n1), np.arange(n2))
    matrix = y.values[idx]
    omega = y.mask.astype(bool)[idx]
    if delta_indicator is None:
        omega2 = np.zeros_like(omega)
    else:
        ind = np.asarray(delta_indicator, dtype=bool)
        if ind.shape != (y.m,):
            raise ValueError("delta_indicator length does not match the snapshot")
        omega2 = ind[idx] & omega
    return HankelView(matrix, omega, omega & ~omega2, omega2)


def project(view: HankelView, subset: CellSubset | str) -> HankelView:
    """Zero the matrix outside the chosen cell subset; bookkeeping is unchanged."""
    subset = CellSubset(subset)
    keep = {
        CellSubset.OMEGA: view.omega,
        CellSubset.OMEGA1: view.omega1,
        CellSubset.OMEGA2: view.omega2,
    }[subset]
    return HankelView(
        np.where(keep, view.matrix, 0.0), view.omega, view.omega1, view.omega2
    )


def dehankelize(matrix: np.ndarray) -> Snapshot:
    """Average each anti-diagonal back into a full snapshot of length n1 + n2 - 1."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2:
        raise ValueError("matrix must be 2-d")
    n1, n2 = matrix.shape
    m = n1 + n2 - 1
    idx = np.add.outer(np.arange(n1), np.arange(n2)).ravel()
    counts = np.bincount(idx, minlength=m)
    sums = (
        np.bincount(idx, weights=matrix.real.ravel(), minlength=m)
        + 1j * np.bincount(idx, weights=matrix.imag.ravel(), minlength=m)
    )
    return Snapshot(sums / counts, np.ones(m, dtype=np.int8), SnapshotKind.FULL)
