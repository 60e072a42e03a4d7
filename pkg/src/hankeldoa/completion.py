"""Matrix completion of the quantized Hankel observation by singular value
thresholding with dual ascent on the observed cells.

Iteration, from y0 = 0 over the observed cells:

    X_k = shrink(scatter(y_{k-1}), tau)        (optionally rank-capped)
    y_k = y_{k-1} + step * (b - gather(X_k))

stopping when ||gather(X_k) - b|| / ||b|| <= tol or at max_iters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .hankel import HankelView, dehankelize, lift
from .quant import DynamicRangeViolation, QuantScheme, uniform_quantize
from .signal import Snapshot, SnapshotKind

DIVERGENCE_FACTOR = 10.0
DIVERGENCE_PATIENCE = 20


@dataclass
class SvtConfig:
    """Solver knobs; tau and step stay None to take the size-derived defaults
    5*sqrt(n1*n2) and 1.2*n1*n2/|omega|.  q is recorded for reporting only."""

    tau: float | None = None
    step: float | None = None
    tol: float = 1e-4
    max_iters: int = 500
    rank_cap: int | None = None
    q: float | None = None

    def __post_init__(self):
        if self.tau is not None and self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.rank_cap is not None and self.rank_cap < 1:
            raise ValueError("rank_cap must be at least 1")


class SvtDivergenceError(RuntimeError):
    """Residual sat above 10x its initial value for 20 straight iterations."""

    def __init__(self, iters: int, residuals: np.ndarray):
        self.iters = iters
        self.residuals = residuals
        super().__init__(
            f"completion diverged after {iters} iterations "
            f"(relative residual {residuals[-1]:.3g})"
        )


@dataclass
class CompletionResult:
    matrix: np.ndarray
    snapshot: Snapshot
    iters: int
    residuals: np.ndarray
    ranks: np.ndarray
    converged: bool
    data_residual: float


def svt_iterate(
    values: np.ndarray, observed: np.ndarray, cfg: SvtConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
    """Core solver on an arbitrary (values, observed-mask) pair.

    Returns (x_hat, residual trace, rank trace, converged).  The solver sees
    only the observed values; how they were produced does not enter.
    """
    values = np.asarray(values, dtype=np.complex128)
    observed = np.asarray(observed, dtype=bool)
    if values.shape != observed.shape or values.ndim != 2:
        raise ValueError("values and observed must be matching 2-d arrays")
    m_obs = int(observed.sum())
    if m_obs == 0:
        raise ValueError("nothing observed")

    n1, n2 = values.shape
    tau = cfg.tau if cfg.tau is not None else 5.0 * np.sqrt(n1 * n2)
    step = cfg.step if cfg.step is not None else 1.2 * n1 * n2 / m_obs

    b = values[observed]
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        zero = np.zeros_like(values)
        return zero, np.zeros(1), np.zeros(1, dtype=np.int64), True

    y = np.zeros(m_obs, dtype=np.complex128)
    scratch = np.zeros_like(values)
    residuals: list[float] = []
    ranks: list[int] = []
    x = np.zeros_like(values)
    converged = False
    high_streak = 0

    for _ in range(cfg.max_iters):
        scratch[observed] = y
        f = linalg.svd(scratch)
        kept = np.maximum(f.sigma - tau, 0.0)
        if cfg.rank_cap is not None:
            kept[cfg.rank_cap:] = 0.0
        x = (f.u * kept) @ f.v.conj().T
        r = b - x[observed]
        resid = float(np.linalg.norm(r)) / b_norm
        residuals.append(resid)
        ranks.append(int(np.count_nonzero(kept)))
        if resid <= cfg.tol:
            converged = True
            break
        high_streak = high_streak + 1 if resid > DIVERGENCE_FACTOR * residuals[0] else 0
        if high_streak >= DIVERGENCE_PATIENCE:
            raise SvtDivergenceError(len(residuals), np.asarray(residuals))
        y += step * r

    return x, np.asarray(residuals), np.asarray(ranks, dtype=np.int64), converged


def svt_complete(view: HankelView, cfg: SvtConfig | None = None) -> CompletionResult:
    """Complete a Hankel observation and fold the result back to a snapshot."""
    cfg = cfg if cfg is not None else SvtConfig()
    x, residuals, ranks, converged = svt_iterate(view.matrix, view.omega, cfg)
    data_residual = float(np.linalg.norm(x[view.omega] - view.matrix[view.omega]))
    return CompletionResult(
        matrix=x,
        snapshot=dehankelize(x),
        iters=len(residuals),
        residuals=residuals,
        ranks=ranks,
        converged=converged,
        data_residual=data_residual,
    )


def build_quantized_hankel(masked: Snapshot, scheme: QuantScheme) -> HankelView:
    """Quantize the lifted observation cell by cell, tagging precision classes.

    Each observed cell draws its own dither, so the repeats of an antenna
    value along its anti-diagonal quantize independently and the later
    anti-diagonal averaging beats the cell-level quantization noise down by
    the diagonal length (up to min(n1, n2) repeats).  Replicating a single
    quantized antenna value across its anti-diagonal instead would forfeit
    that averaging and leave the one-bit noise floor at the antenna level.

    The step size of a cell follows its antenna's precision class.  Dithers
    are two full-grid uniform fields, one per step size, drawn from
    scheme.dither_seed in a fixed order, so the output is a pure function of
    (masked, scheme).
    """
    if masked.kind is not SnapshotKind.MASKED:
        raise ValueError("build_quantized_hankel expects a masked snapshot")
    if scheme.delta_indicator is None:
        raise ValueError("scheme needs a delta_indicator")
    ind = scheme.delta_indicator
    if ind.shape != masked.mask.shape:
        raise ValueError("delta_indicator length does not match the snapshot")
    if np.any((ind == 1) & (masked.mask == 0)):
        raise ValueError("delta_indicator marks antennas outside the mask")

    view = lift(masked, ind)
    n1, n2 = view.n1, view.n2
    x = view.matrix

    limit = scheme.delta1 / 2.0
    for part, data in (("real", x.real), ("imag", x.imag)):
        bad = view.omega1 & (np.abs(data) > limit)
        if np.any(bad):
            i, j = np.unravel_index(int(np.argmax(bad)), bad.shape)
            raise DynamicRangeViolation(
                view.antenna_index(int(i), int(j)) + 1,
                float(data[i, j]),
                limit,
                part,
            )

    rng = np.random.default_rng(scheme.dither_seed)
    tau1 = scheme.delta1 * (
        rng.uniform(-0.5, 0.5, (n1, n2)) + 1j * rng.uniform(-0.5, 0.5, (n1, n2))
    )
    tau2 = scheme.delta2 * (
        rng.uniform(-0.5, 0.5, (n1, n2)) + 1j * rng.uniform(-0.5, 0.5, (n1, n2))
    )

    q = np.zeros_like(x)
    sgn_re = np.where(x.real + tau1.real >= 0, 1.0, -1.0)
    sgn_im = np.where(x.imag + tau1.imag >= 0, 1.0, -1.0)
    q[view.omega1] = limit * (sgn_re + 1j * sgn_im)[view.omega1]
    if np.any(view.omega2):
        q_re = uniform_quantize(
            x.real[view.omega2], scheme.delta2, tau2.real[view.omega2], scheme.levels
        )
        q_im = uniform_quantize(
            x.imag[view.omega2], scheme.delta2, tau2.imag[view.omega2], scheme.levels
        )
        q[view.omega2] = q_re + 1j * q_im
    return HankelView(q, view.omega, view.omega1, view.omega2)


def rank_projected_snapshot(matrix: np.ndarray, rank: int) -> Snapshot:
    """Fold a completed matrix to a snapshot through a rank projection.

    The matrix is anti-diagonal averaged first, re-lifted, truncated to the
    `rank` leading singular directions, and averaged back.  Averaging before
    the truncation matters: each anti-diagonal mean carries its cell noise
    reduced by the diagonal length, so the rank decision sees the cleanest
    matrix available.
    """
    if rank < 1:
        raise ValueError("rank must be at least 1")
    averaged = lift(dehankelize(matrix))
    f = linalg.svd(averaged.matrix)
    kept = f.sigma.copy()
    kept[rank:] = 0.0
    return dehankelize((f.u * kept) @ f.v.conj().T)
