"""Experiment configuration: the INI scenario format, placement resolution,
and scenario hashing.

A scenario pins everything a run needs: geometry, scene, quantizer setup,
solver overrides, spectrum size, seeds, and the output directory.  Every
random draw is seeded from the file, so re-running a scenario reproduces the
outputs byte for byte.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .completion import SvtConfig
from .geometry import ArrayGeometry, RadarUnit, masking_vector, synthesize_virtual_array
from .signal import TargetScene

NAMED_PLACEMENTS = ("edges", "last4", "first4")

DEFAULT_TX1 = (1, 9, 25)
DEFAULT_RX1 = (1, 6, 7, 8)
DEFAULT_TX2 = (51, 67, 75)
DEFAULT_RX2 = (68, 69, 70, 75)


class ScenarioError(ValueError):
    """A scenario file or field failed validation."""


@dataclass(frozen=True)
class Scenario:
    """One fully seeded experiment definition.

    amplitudes=None leaves the source amplitudes to the signal model's seeded
    random phases; a tuple fixes them.  placement is one of the named rules
    or an explicit tuple of 1-based virtual antenna indices.  truncate_rank
    is the model order of the final rank projection and defaults to the
    number of targets.  tau/step stay None to take the solver's size-derived
    defaults.
    """

    name: str
    angles_deg: tuple[float, ...]
    amplitudes: tuple[complex, ...] | None = None
    snr_db: float = 20.0
    tx1: tuple[int, ...] = DEFAULT_TX1
    rx1: tuple[int, ...] = DEFAULT_RX1
    tx2: tuple[int, ...] = DEFAULT_TX2
    rx2: tuple[int, ...] = DEFAULT_RX2
    bits: int = 10
    margin: float = 0.05
    placement: str | tuple[int, ...] = "first4"
    tau: float | None = None
    step: float | None = None
    tol: float = 1e-4
    max_iters: int = 500
    rank_cap: int | None = None
    truncate_rank: int | None = None
    n_fft: int = 1024
    runs: int = 20
    seed_signal: int = 0
    seed_dither: int = 1000
    out_dir: str = ""

    def __post_init__(self):
        def fail(msg):
            raise ScenarioError(f"scenario {self.name!r}: {msg}")

        if not self.name or not self.name.strip():
            raise ScenarioError("scenario name must be nonempty")
        object.__setattr__(self, "angles_deg", tuple(float(a) for a in self.angles_deg))
        if not self.angles_deg:
            fail("[scene] angles_deg: need at least one target")
        if any(abs(a) >= 90.0 for a in self.angles_deg):
            fail("[scene] angles_deg: azimuths must lie inside (-90, 90)")
        if self.amplitudes is not None:
            amps = tuple(complex(a) for a in self.amplitudes)
            if len(amps) != len(self.angles_deg):
                fail("[scene] amplitudes: length must match angles_deg")
            object.__setattr__(self, "amplitudes", amps)
        for field_name in ("tx1", "rx1", "tx2", "rx2"):
            object.__setattr__(
                self, field_name, tuple(int(p) for p in getattr(self, field_name))
            )
        if self.bits < 2:
            fail("[quant] bits: must be at least 2")
        if self.margin < 0:
            fail("[quant] margin: must be nonnegative")
        if isinstance(self.placement, str):
            if self.placement not in NAMED_PLACEMENTS:
                fail(
                    f"[quant] placement: {self.placement!r} is not one of "
                    f"{NAMED_PLACEMENTS} or an explicit antenna list"
                )
        else:
            ants = tuple(int(a) for a in self.placement)
            if not ants:
                fail("[quant] placement: explicit list must be nonempty")
            if len(set(ants)) != len(ants):
                fail("[quant] placement: explicit list has repeats")
            if any(a < 1 for a in ants):
                fail("[quant] placement: antenna indices are 1-based positives")
            object.__setattr__(self, "placement", ants)
        if self.tau is not None and self.tau <= 0:
            fail("[svt] tau: must be positive")
        if self.step is not None and self.step <= 0:
            fail("[svt] step: must be positive")
        if self.tol <= 0:
            fail("[svt] tol: must be positive")
        if self.max_iters < 1:
            fail("[svt] max_iters: must be at least 1")
        if self.rank_cap is not None and self.rank_cap < 1:
            fail("[svt] rank_cap: must be at least 1")
        if self.truncate_rank is not None and self.truncate_rank < 1:
            fail("[svt] truncate_rank: must be at least 1")
        if self.n_fft < 2 or self.n_fft & (self.n_fft - 1) != 0:
            fail("[spectrum] n_fft: must be a power of two")
        if self.runs < 1:
            fail("[scenario] runs: must be at least 1")
        if not self.out_dir:
            object.__setattr__(self, "out_dir", f"runs/{self.name}")

    @property
    def model_order(self) -> int:
        """Rank of the final projection; the target count unless overridden."""
        if self.truncate_rank is not None:
            return self.truncate_rank
        return len(self.angles_deg)


def geometry_of(scn: Scenario) -> ArrayGeometry:
    return synthesize_virtual_array(
        RadarUnit(scn.tx1, scn.rx1), RadarUnit(scn.tx2, scn.rx2)
    )


def scene_of(scn: Scenario) -> TargetScene:
    return TargetScene(
        angles_deg=scn.angles_deg, amplitudes=scn.amplitudes, snr_db=scn.snr_db
    )


def svt_config_of(scn: Scenario) -> SvtConfig:
    return SvtConfig(
        tau=scn.tau,
        step=scn.step,
        tol=scn.tol,
        max_iters=scn.max_iters,
        rank_cap=scn.rank_cap,
    )


def placement_to_delta(
    placement: str | tuple[int, ...], geom: ArrayGeometry
) -> np.ndarray:
    """Resolve a placement rule to the 0/1 multi-bit indicator over the aperture.

    Named rules pick from the observed antennas in virtual-index order:
    first4 takes the first four, last4 the last four, edges the first two and
    last two.  An explicit tuple gives 1-based virtual indices, each of which
    must be observed.
    """
    mask = masking_vector(geom)
    observed = np.flatnonzero(mask == 1) + 1
    if isinstance(placement, str):
        if placement not in NAMED_PLACEMENTS:
            raise ScenarioError(f"unknown placement rule {placement!r}")
        if observed.size < 4:
            raise ScenarioError("named placements need at least 4 observed antennas")
        if placement == "first4":
            chosen = observed[:4]
        elif placement == "last4":
            chosen = observed[-4:]
        else:
            chosen = np.concatenate([observed[:2], observed[-2:]])
    else:
        chosen = np.asarray(sorted(int(a) for a in placement))
        missing = [int(a) for a in chosen if a not in set(observed.tolist())]
        if missing:
            raise ScenarioError(
                f"placement antennas {missing} are not observed virtual elements"
            )
    ind = np.zeros(geom.m, dtype=np.int8)
    ind[chosen - 1] = 1
    return ind


def _format_float(x: float) -> str:
    return repr(float(x))


def _format_complex(z: complex) -> str:
    z = complex(z)
    re = _format_float(z.real)
    im = _format_float(z.imag)
    sign = "+" if z.imag >= 0 else "-"
    return f"{re}{sign}{im.lstrip('-')}j"


def _format_amplitudes(amps: tuple[complex, ...] | None) -> str:
    if amps is None:
        return "seeded-phases"
    if all(a == 1.0 + 0.0j for a in amps):
        return "unit"
    return ", ".join(_format_complex(a) for a in amps)


def scenario_to_ini(scn: Scenario, include_output: bool = True) -> str:
    """Canonical INI text: fixed section and key order, optional keys only
    when set, so equal scenarios serialize to equal bytes.

    include_output=False drops the [output] section; that form identifies the
    experiment itself, independent of where its files land.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp["scenario"] = {"name": scn.name, "runs": str(scn.runs)}
    cp["geometry"] = {
        "tx1": ", ".join(map(str, scn.tx1)),
        "rx1": ", ".join(map(str, scn.rx1)),
        "tx2": ", ".join(map(str, scn.tx2)),
        "rx2": ", ".join(map(str, scn.rx2)),
    }
    cp["scene"] = {
        "angles_deg": ", ".join(_format_float(a) for a in scn.angles_deg),
        "amplitudes": _format_amplitudes(scn.amplitudes),
        "snr_db": _format_float(scn.snr_db),
    }
    placement = (
        scn.placement
        if isinstance(scn.placement, str)
        else ", ".join(map(str, scn.placement))
    )
    cp["quant"] = {
        "bits": str(scn.bits),
        "margin": _format_float(scn.margin),
        "placement": placement,
    }
    svt: dict[str, str] = {}
    if scn.tau is not None:
        svt["tau"] = _format_float(scn.tau)
    if scn.step is not None:
        svt["step"] = _format_float(scn.step)
    svt["tol"] = _format_float(scn.tol)
    svt["max_iters"] = str(scn.max_iters)
    if scn.rank_cap is not None:
        svt["rank_cap"] = str(scn.rank_cap)
    if scn.truncate_rank is not None:
        svt["truncate_rank"] = str(scn.truncate_rank)
    cp["svt"] = svt
    cp["spectrum"] = {"n_fft": str(scn.n_fft)}
    cp["seeds"] = {"signal": str(scn.seed_signal), "dither": str(scn.seed_dither)}
    if include_output:
        cp["output"] = {"dir": scn.out_dir}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


_SECTION_KEYS = {
    "scenario": {"name", "runs"},
    "geometry": {"tx1", "rx1", "tx2", "rx2"},
    "scene": {"angles_deg", "amplitudes", "snr_db"},
    "quant": {"bits", "margin", "placement"},
    "svt": {"tau", "step", "tol", "max_iters", "rank_cap", "truncate_rank"},
    "spectrum": {"n_fft"},
    "seeds": {"signal", "dither"},
    "output": {"dir"},
}


def _parse_int_list(raw: str, where: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok.strip()) for tok in raw.split(",") if tok.strip())
    except ValueError:
        raise ScenarioError(f"{where}: expected comma-separated integers, got {raw!r}")


def _parse_amplitudes(raw: str, where: str):
    text = raw.strip().lower()
    if text in ("seeded-phases", "seeded"):
        return None, False
    if text == "unit":
        return None, True
    try:
        amps = tuple(
            complex(tok.strip().replace(" ", "")) for tok in raw.split(",") if tok.strip()
        )
    except ValueError:
        raise ScenarioError(
            f"{where}: expected 'unit', 'seeded-phases', or complex values, got {raw!r}"
        )
    if not amps:
        raise ScenarioError(f"{where}: empty amplitude list")
    return amps, False


def parse_scenario(text: str, fallback_name: str = "") -> Scenario:
    """Parse INI text into a Scenario, rejecting unknown sections and keys."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"malformed scenario file: {exc}")

    for section in cp.sections():
        if section not in _SECTION_KEYS:
            raise ScenarioError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in _SECTION_KEYS[section]:
                raise ScenarioError(f"unknown key {key!r} in section [{section}]")

    def get(section, key, default=None):
        if cp.has_option(section, key):
            return cp.get(section, key)
        return default

    def get_typed(section, key, caster, default):
        raw = get(section, key)
        if raw is None:
            return default
        try:
            return caster(raw)
        except (TypeError, ValueError):
            raise ScenarioError(f"[{section}] {key}: cannot parse {raw!r}")

    name = get("scenario", "name", fallback_name) or fallback_name
    if not name:
        raise ScenarioError("[scenario] name: missing")

    angles_raw = get("scene", "angles_deg")
    if angles_raw is None:
        raise ScenarioError("[scene] angles_deg: missing")
    try:
        angles = tuple(float(tok) for tok in angles_raw.split(",") if tok.strip())
    except ValueError:
        raise ScenarioError(f"[scene] angles_deg: cannot parse {angles_raw!r}")

    amps_raw = get("scene", "amplitudes", "unit")
    amplitudes, is_unit = _parse_amplitudes(amps_raw, "[scene] amplitudes")
    if is_unit:
        amplitudes = (1.0 + 0.0j,) * len(angles)

    placement_raw = get("quant", "placement", "first4").strip()
    placement: str | tuple[int, ...]
    if placement_raw in NAMED_PLACEMENTS:
        placement = placement_raw
    else:
        placement = _parse_int_list(placement_raw, "[quant] placement")
        if not placement:
            raise ScenarioError(f"[quant] placement: cannot parse {placement_raw!r}")

    return Scenario(
        name=name,
        angles_deg=angles,
        amplitudes=amplitudes,
        snr_db=get_typed("scene", "snr_db", float, 20.0),
        tx1=get_typed("geometry", "tx1", lambda r: _parse_int_list(r, "tx1"), DEFAULT_TX1),
        rx1=get_typed("geometry", "rx1", lambda r: _parse_int_list(r, "rx1"), DEFAULT_RX1),
        tx2=get_typed("geometry", "tx2", lambda r: _parse_int_list(r, "tx2"), DEFAULT_TX2),
        rx2=get_typed("geometry", "rx2", lambda r: _parse_int_list(r, "rx2"), DEFAULT_RX2),
        bits=get_typed("quant", "bits", int, 10),
        margin=get_typed("quant", "margin", float, 0.05),
        placement=placement,
        tau=get_typed("svt", "tau", float, None),
        step=get_typed("svt", "step", float, None),
        tol=get_typed("svt", "tol", float, 1e-4),
        max_iters=get_typed("svt", "max_iters", int, 500),
        rank_cap=get_typed("svt", "rank_cap", int, None),
        truncate_rank=get_typed("svt", "truncate_rank", int, None),
        n_fft=get_typed("spectrum", "n_fft", int, 1024),
        runs=get_typed("scenario", "runs", int, 20),
        seed_signal=get_typed("seeds", "signal", int, 0),
        seed_dither=get_typed("seeds", "dither", int, 1000),
        out_dir=get("output", "dir", "") or "",
    )


def scenario_hash(scn: Scenario) -> str:
    """sha256 over the canonical serialization, output location excluded."""
    text = scenario_to_ini(scn, include_output=False)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def bundled_scenario_names() -> list[str]:
    """Names of the scenario files shipped inside the package."""
    root = resources.files("hankeldoa").joinpath("scenarios")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def load_bundled(name: str) -> Scenario:
    path = resources.files("hankeldoa").joinpath("scenarios", f"{name}.ini")
    if not path.is_file():
        raise ScenarioError(
            f"no bundled scenario {name!r}; available: {bundled_scenario_names()}"
        )
    return parse_scenario(path.read_text(encoding="utf-8"), fallback_name=name)


def load_scenario(path: str) -> Scenario:
    """Load from a filesystem path, falling back to the bundled set by name."""
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        stem = os.path.splitext(os.path.basename(path))[0]
        return parse_scenario(text, fallback_name=stem)
    return load_bundled(path)
