"""Acceptance scoreboard.

Each test covers one numbered acceptance criterion, enforces its stated
tolerance and runtime budget, and prints one [PASS]/[FAIL] line (run with
pytest -s to see the full scoreboard).
"""

import time

import numpy as np

from hankeldoa.geometry import RadarUnit, masking_vector, synthesize_virtual_array
from hankeldoa.hankel import hankel_shape, lift
from hankeldoa.pipeline import (
    DITHER_GRID,
    EMBEDDING_DELTA,
    EMBEDDING_EPSILONS,
    EMBEDDING_LEVELS,
    EMBEDDING_M_PRIME,
    EMBEDDING_SPEC,
    SAMPLING_DELTA,
    SAMPLING_M_PRIME,
    SAMPLING_PAIRS,
    run_scenario,
)
from hankeldoa.quant import one_bit, uniform_quantize
from hankeldoa.scenario import geometry_of, load_bundled, placement_to_delta
from hankeldoa.signal import TargetScene, synthesize_snapshot
from hankeldoa.theory import (
    random_low_rank,
    verify_dither_identity,
    verify_embedding,
    verify_sampling_identity,
)
from hankeldoa.completion import SvtConfig, svt_iterate

U_BIN = 2.0 / 1024.0

_batches = {}


def batch(name):
    """Memoized full seeded batch of a bundled scenario, nothing written."""
    if name not in _batches:
        _batches[name] = run_scenario(load_bundled(name), write=False)
    return _batches[name]


def report(number, ok, detail, elapsed, budget):
    tag = "PASS" if ok and elapsed < budget else "FAIL"
    print(f"[{tag}] criterion {number}: {detail} ({elapsed:.1f} s, budget {budget} s)")
    assert ok, f"criterion {number}: {detail}"
    assert elapsed < budget, f"criterion {number} runtime {elapsed:.1f} s"


def test_criterion_1_geometry_bookkeeping():
    t0 = time.perf_counter()
    geom = synthesize_virtual_array(
        RadarUnit((1, 9, 25), (1, 6, 7, 8)), RadarUnit((51, 67, 75), (68, 69, 70, 75))
    )
    ok = (
        len(geom.omega_prime) == 47
        and geom.multiplicity == 48
        and geom.m == 149
        and hankel_shape(geom.m) == (75, 75)
    )
    ind = placement_to_delta("first4", geom)
    mask = masking_vector(geom)
    probe = np.where(mask == 1, 1.0 + 0.0j, 0.0)
    from hankeldoa.signal import Snapshot, SnapshotKind

    view = lift(Snapshot(probe, mask, SnapshotKind.MASKED), ind)
    omega = int(view.omega.sum())
    omega1 = int(view.omega1.sum())
    omega2 = int(view.omega2.sum())
    rate = omega2 / omega1
    ok = (
        ok
        and omega == 1893
        and omega1 == 1871
        and omega2 == 22
        and round(100.0 * omega / (75 * 75), 2) == 33.65
        and f"{rate:.3g}" == "0.0118"
    )
    report(
        1,
        ok,
        f"47/48 elements, M=149, 75x75, |omega|={omega} (33.65%), "
        f"|omega2|={omega2}, |omega1|={omega1}, rate {rate:.3g}",
        time.perf_counter() - t0,
        1.0,
    )


def test_criterion_2_dither_identity_grid():
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for i, (a, b, delta) in enumerate(DITHER_GRID):
        rep = verify_dither_identity(a, b, delta, trials=1_000_000, seed=i)
        ok = ok and rep.passed
        if rep.stderr > 0:
            worst = max(worst, abs(rep.mc_mean - rep.expected) / rep.stderr)
    report(
        2,
        ok,
        f"3 grid points x 1e6 trials, worst deviation {worst:.2f} std errors",
        time.perf_counter() - t0,
        30.0,
    )


def test_criterion_3_one_bit_reduction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(12)
    delta = 2.0
    x = rng.uniform(-delta / 2, delta / 2, size=100_000)
    tau = rng.uniform(-delta / 2, delta / 2, size=100_000)
    coarse = np.array([one_bit(xi, delta, ti) for xi, ti in zip(x, tau)])
    single_level = uniform_quantize(x, delta, tau, 1)
    agree = int(np.sum(coarse == single_level))
    ok = agree == 100_000
    report(
        3,
        ok,
        f"one-bit equals the K=1 quantizer on {agree}/100000 samples",
        time.perf_counter() - t0,
        5.0,
    )


def test_criterion_4_hankel_rank_property():
    t0 = time.perf_counter()
    geom = geometry_of(load_bundled("two_targets_first4"))
    angle_sets = {
        1: (10.0,),
        2: (-34.0, 18.0),
        3: (-28.0, -24.0, 44.0),
        4: (-20.0, -2.0, 35.0, 53.0),
        5: (-49.0, -46.0, -40.0, -28.0, -13.0),
    }
    worst = 0.0
    for p, angles in angle_sets.items():
        scene = TargetScene(angles, amplitudes=(1 + 0j,) * p)
        full, _ = synthesize_snapshot(scene, geom, seed=0)
        sigma = np.linalg.svd(lift(full).matrix, compute_uv=False)
        worst = max(worst, sigma[p] / sigma[0])
    ok = worst <= 1e-8
    report(
        4,
        ok,
        f"P in 1..5: worst sigma_(P+1)/sigma_1 = {worst:.2e} <= 1e-8",
        time.perf_counter() - t0,
        5.0,
    )


def test_criterion_5_svt_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    truth = np.outer(rng.standard_normal(8), rng.standard_normal(8)).astype(complex)
    idx = rng.choice(64, size=38, replace=False)
    mask = np.zeros(64, dtype=bool)
    mask[idx] = True
    mask = mask.reshape(8, 8)
    x, residuals, _, converged = svt_iterate(
        np.where(mask, truth, 0), mask, SvtConfig()
    )
    rel = float(np.linalg.norm(x - truth) / np.linalg.norm(truth))
    ok = converged and rel <= 1e-3 and len(residuals) <= 500
    report(
        5,
        ok,
        f"8x8 rank-1, 38/64 observed: error {rel:.2e} in {len(residuals)} iterations",
        time.perf_counter() - t0,
        5.0,
    )


def u_of(theta_deg):
    return np.sin(np.radians(theta_deg))


def test_criterion_6_two_target_configs():
    t0 = time.perf_counter()
    names = ("two_targets_edges", "two_targets_last4", "two_targets_first4")
    truth = np.sort(np.array([-34.0, 18.0]))
    ok = True
    details = []
    in_bin = 0
    total_targets = 0
    for name in names:
        manifest = batch(name)
        hits = 0
        margins = []
        for summary in manifest.runs:
            good = (
                summary.peaks_complete
                and summary.max_error_deg is not None
                and summary.max_error_deg <= 1.0
            )
            if good:
                hits += 1
                margins.append(summary.sidelobe_margin_db)
            est = np.sort([t for t, _ in summary.peaks])
            for k in range(truth.size):
                total_targets += 1
                if abs(u_of(est[k]) - u_of(truth[k])) <= U_BIN + 1e-12:
                    in_bin += 1
        ok = ok and hits >= 18 and all(m >= 5.0 for m in margins)
        floor = min(margins) if margins else float("nan")
        details.append(f"{name} {hits}/20 hits, min margin {floor:.2f} dB")
    # shared-seed agreement across configs: run 0 peak positions within one bin
    run0 = {n: np.sort([t for t, _ in batch(n).runs[0].peaks]) for n in names}
    spread = 0.0
    for k in range(truth.size):
        us = [u_of(run0[n][k]) for n in names]
        spread = max(spread, max(us) - min(us))
    ok = ok and spread <= U_BIN + 1e-12
    bin_frac = in_bin / total_targets
    ok = ok and bin_frac >= 0.9
    report(
        6,
        ok,
        "; ".join(details)
        + f"; shared-seed spread {spread / U_BIN:.2f} bins"
        + f"; {in_bin}/{total_targets} peaks within one bin",
        time.perf_counter() - t0,
        120.0,
    )


def test_criterion_7_multi_target_configs():
    t0 = time.perf_counter()
    ok = True
    details = []
    for name in ("three_targets", "four_targets", "five_targets"):
        manifest = batch(name)
        hits = sum(
            1
            for s in manifest.runs
            if s.peaks_complete
            and s.max_error_deg is not None
            and s.max_error_deg <= 1.0
        )
        ok = ok and hits >= 16
        details.append(f"{name} {hits}/20")
    report(
        7,
        ok,
        "top-P peaks within 1 degree: " + ", ".join(details) + " (bar 16/20)",
        time.perf_counter() - t0,
        120.0,
    )


def test_criterion_8_embedding_concentration():
    t0 = time.perf_counter()
    rep = verify_embedding(
        EMBEDDING_SPEC,
        m_prime=EMBEDDING_M_PRIME,
        delta=EMBEDDING_DELTA,
        levels=EMBEDDING_LEVELS,
        epsilons=np.asarray(EMBEDDING_EPSILONS),
        trials=2000,
        seed=500,
    )
    expected_bounds = 2.0 * np.exp(
        -np.asarray(EMBEDDING_EPSILONS) ** 2
        * EMBEDDING_M_PRIME
        / (EMBEDDING_LEVELS**2 * EMBEDDING_DELTA**2)
    )
    ok = bool(rep.all_passed) and np.allclose(
        rep.bound, expected_bounds, rtol=1e-12
    )
    pairs = ", ".join(
        f"eps={e:g}: {emp:.4g}<={b:.4g}"
        for e, emp, b in zip(rep.epsilons, rep.empirical, rep.bound)
    )
    report(8, ok, pairs, time.perf_counter() - t0, 60.0)


def test_criterion_9_sampling_identity():
    t0 = time.perf_counter()
    ok = True
    worst = 0.0
    for k in range(SAMPLING_PAIRS):
        rng = np.random.default_rng([0, 7000 + k])
        x = random_low_rank(EMBEDDING_SPEC, rng)
        y = random_low_rank(EMBEDDING_SPEC, rng)
        rep = verify_sampling_identity(
            x, y, m_prime=SAMPLING_M_PRIME, delta=SAMPLING_DELTA,
            trials=2000, seed=100 + k,
        )
        ok = ok and rep.passed
        if rep.stderr > 0:
            worst = max(worst, abs(rep.mc_mean - rep.expected) / rep.stderr)
    report(
        9,
        ok,
        f"5 rank-2 pairs x 2000 draws, worst deviation {worst:.2f} std errors",
        time.perf_counter() - t0,
        30.0,
    )


def test_criterion_10_determinism(tmp_path):
    t0 = time.perf_counter()
    scn = load_bundled("two_targets_first4")
    a = run_scenario(scn, out_dir=str(tmp_path / "a"))
    b = run_scenario(scn, out_dir=str(tmp_path / "b"))
    identical = True
    for name in a.outputs:
        if name == "manifest.json":
            continue
        if (tmp_path / "a" / name).read_bytes() != (tmp_path / "b" / name).read_bytes():
            identical = False
    ok = identical and a.manifest_hash == b.manifest_hash
    report(
        10,
        ok,
        f"{len(a.outputs) - 1} CSVs byte-identical, manifest hash "
        f"{a.manifest_hash[:12]}... reproduced",
        time.perf_counter() - t0,
        30.0,
    )
