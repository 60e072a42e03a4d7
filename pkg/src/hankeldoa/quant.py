"""Dithered uniform quantization, one-bit and multi-bit, applied per antenna.

The core cell rule is Q(x) = delta * (floor((x + tau)/delta) + 1/2) with
dither tau drawn uniformly from [-delta/2, delta/2].  A `levels` count K
clamps the cell index to [-K, K-1], so outputs are odd multiples of delta/2
saturating at +/-(K - 1/2)*delta; K = 1 collapses to the one-bit rule
(delta/2)*sgn(x + tau) with sgn(0) taken as +1.  Complex data is quantized
part-wise with independent dithers for the real and imaginary parts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import Snapshot, SnapshotKind


class DynamicRangeViolation(ValueError):
    """A one-bit antenna saw |part| > delta1/2 and cannot represent it."""

    def __init__(self, antenna_index: int | None, value: float, limit: float, part: str):
        self.antenna_index = antenna_index
        self.value = value
        self.limit = limit
        self.part = part
        where = "input" if antenna_index is None else f"antenna {antenna_index}"
        super().__init__(
            f"{where}: |{part}| = {abs(value):.6g} exceeds the one-bit range {limit:.6g}"
        )


@dataclass
class QuantScheme:
    """Mixed-precision quantizer description.

    delta_indicator marks the multi-bit antennas (1) against one-bit ones (0)
    over the full virtual aperture; it may stay None for uses that only need
    the scalar parameters.  levels = 2**(bits-1), so a b-bit ADC has 2*levels
    cells per real part.
    """

    delta1: float
    delta2: float
    bits: int
    delta_indicator: np.ndarray | None = None
    dither_seed: int = 0

    def __post_init__(self):
        if self.delta1 <= 0 or self.delta2 <= 0:
            raise ValueError("quantizer step sizes must be positive")
        if self.bits < 2:
            raise ValueError("multi-bit scheme needs at least 2 bits")
        if self.delta_indicator is not None:
            ind = np.asarray(self.delta_indicator, dtype=np.int8)
            if ind.ndim != 1 or not np.all((ind == 0) | (ind == 1)):
                raise ValueError("delta_indicator must be a 1-d 0/1 vector")
            self.delta_indicator = ind

    @property
    def levels(self) -> int:
        return 2 ** (self.bits - 1)


def uniform_quantize(x, delta: float, tau, levels: int | None = None):
    """Dithered mid-rise quantizer on real data; levels=None means no saturation."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    cell = np.floor((np.asarray(x, dtype=np.float64) + tau) / delta)
    if levels is not None:
        if levels < 1:
            raise ValueError("levels must be at least 1")
        cell = np.clip(cell, -levels, levels - 1)
    return delta * (cell + 0.5)


def quantize_scalar(x: float, delta: float, tau: float, levels: int) -> float:
    """Single-value saturating quantizer; see uniform_quantize."""
    if not np.isfinite(x) or not np.isfinite(tau):
        raise ValueError("x and tau must be finite")
    return float(uniform_quantize(x, delta, tau, levels))


def one_bit(x: float, delta1: float, tau: float) -> float:
    """Sign quantizer scaled to +/- delta1/2; valid only when |x| <= delta1/2."""
    if abs(x) > delta1 / 2.0:
        raise DynamicRangeViolation(None, x, delta1 / 2.0, "value")
    return delta1 / 2.0 if x + tau >= 0 else -delta1 / 2.0


def design_scales(masked: Snapshot, margin: float, levels: int) -> tuple[float, float]:
    """Pick (delta1, delta2) from the observed data range.

    R is the largest |real part| or |imaginary part| seen on the mask.  The
    one-bit step is 2R(1+margin) so every part fits its half-cell; the
    multi-bit step spreads the 2*levels cells across [-R, R].
    """
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    observed = masked.values[masked.mask == 1]
    if observed.size == 0:
        raise ValueError("masked snapshot has no observed antennas")
    r = max(float(np.max(np.abs(observed.real))), float(np.max(np.abs(observed.imag))))
    if r == 0.0:
        raise ValueError("observed snapshot is identically zero")
    return 2.0 * r * (1.0 + margin), r / levels


def dither_field(scheme: QuantScheme, m: int) -> np.ndarray:
    """Complex dither vector for the whole aperture, one draw per antenna part.

    The step assigned to each antenna follows the delta_indicator, so the
    field is a pure function of (dither_seed, delta1, delta2, indicator) and
    independent of any evaluation schedule.
    """
    if scheme.delta_indicator is None:
        raise ValueError("scheme needs a delta_indicator to scale the dither field")
    if scheme.delta_indicator.shape[0] != m:
        raise ValueError("delta_indicator length does not match the aperture")
    rng = np.random.default_rng(scheme.dither_seed)
    u = rng.uniform(-0.5, 0.5, size=(m, 2))
    step = np.where(scheme.delta_indicator == 1, scheme.delta2, scheme.delta1)
    return step * u[:, 0] + 1j * (step * u[:, 1])


def quantize_mixed(masked: Snapshot, scheme: QuantScheme) -> Snapshot:
    """Quantize the observed antennas, one-bit or multi-bit per the indicator."""
    if masked.kind is not SnapshotKind.MASKED:
        raise ValueError("quantize_mixed expects a masked snapshot")
    if scheme.delta_indicator is None:
        raise ValueError("scheme needs a delta_indicator")
    ind = scheme.delta_indicator
    mask = masked.mask
    if ind.shape != mask.shape:
        raise ValueError("delta_indicator length does not match the snapshot")
    if np.any((ind == 1) & (mask == 0)):
        raise ValueError("delta_indicator marks antennas outside the mask")

    tau = dither_field(scheme, masked.m)
    out = np.zeros(masked.m, dtype=np.complex128)

    coarse = (mask == 1) & (ind == 0)
    limit = scheme.delta1 / 2.0
    for part, data in (("real", masked.values.real), ("imag", masked.values.imag)):
        bad = coarse & (np.abs(data) > limit)
        if np.any(bad):
            idx = int(np.argmax(bad))
            raise DynamicRangeViolation(idx + 1, float(data[idx]), limit, part)
    sgn_re = np.where(masked.values.real + tau.real >= 0, 1.0, -1.0)
    sgn_im = np.where(masked.values.imag + tau.imag >= 0, 1.0, -1.0)
    out[coarse] = limit * (sgn_re[coarse] + 1j * sgn_im[coarse])

    fine = (mask == 1) & (ind == 1)
    if np.any(fine):
        q_re = uniform_quantize(
            masked.values.real[fine], scheme.delta2, tau.real[fine], scheme.levels
        )
        q_im = uniform_quantize(
            masked.values.imag[fine], scheme.delta2, tau.imag[fine], scheme.levels
        )
        out[fine] = q_re + 1j * q_im

    return Snapshot(out, mask.copy(), SnapshotKind.QUANTIZED)
