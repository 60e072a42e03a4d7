"""Shared fixtures: the reference two-unit geometry and snapshots built on it."""

import numpy as np
import pytest

from hankeldoa.geometry import RadarUnit, synthesize_virtual_array
from hankeldoa.signal import Snapshot, SnapshotKind, TargetScene, synthesize_snapshot

TX1 = (1, 9, 25)
RX1 = (1, 6, 7, 8)
TX2 = (51, 67, 75)
RX2 = (68, 69, 70, 75)


@pytest.fixture(scope="session")
def two_unit_geom():
    return synthesize_virtual_array(RadarUnit(TX1, RX1), RadarUnit(TX2, RX2))


@pytest.fixture(scope="session")
def two_target_masked(two_unit_geom):
    """Seeded noisy masked snapshot for the {-34, 18} degree scene."""
    scene = TargetScene((-34.0, 18.0), amplitudes=(1 + 0j, 1 + 0j), snr_db=20.0)
    full, masked = synthesize_snapshot(scene, two_unit_geom, seed=0)
    return full, masked


def constant_masked(masked: Snapshot, value: complex) -> Snapshot:
    """Replace every observed entry of a masked snapshot with one value."""
    values = np.where(masked.mask.astype(bool), value, 0.0).astype(complex)
    return Snapshot(values, masked.mask.copy(), SnapshotKind.MASKED)
