"""Mixed-precision quantized Hankel completion for sparse-array azimuth estimation."""

from ._version import __version__
from .geometry import ArrayGeometry, RadarUnit, masking_vector, synthesize_virtual_array
from .signal import Snapshot, SnapshotKind, TargetScene, steering_vector, synthesize_snapshot
from .quant import (
    DynamicRangeViolation,
    QuantScheme,
    design_scales,
    dither_field,
    one_bit,
    quantize_mixed,
    quantize_scalar,
    uniform_quantize,
)
from .hankel import (
    CellSubset,
    HankelView,
    antidiag_weights,
    dehankelize,
    hankel_shape,
    lift,
    project,
)
from .linalg import SVDFactors, shrink, svd
from .completion import (
    CompletionResult,
    SvtConfig,
    SvtDivergenceError,
    build_quantized_hankel,
    rank_projected_snapshot,
    svt_complete,
    svt_iterate,
)
from .spectrum import (
    AngleSpectrum,
    PeakSet,
    SpectrumSource,
    angle_spectrum,
    find_peaks,
    local_maxima,
    max_sidelobe_db,
)
from .scenario import (
    Scenario,
    ScenarioError,
    bundled_scenario_names,
    load_bundled,
    load_scenario,
    parse_scenario,
    placement_to_delta,
    scenario_hash,
    scenario_to_ini,
)
from .pipeline import (
    RunManifest,
    RunSummary,
    TheoryBattery,
    read_snapshot_csv,
    run_scenario,
    theory_battery,
    write_hankel_csv,
    write_snapshot_csv,
)

__all__ = [
    "ArrayGeometry",
    "RadarUnit",
    "masking_vector",
    "synthesize_virtual_array",
    "Snapshot",
    "SnapshotKind",
    "TargetScene",
    "steering_vector",
    "synthesize_snapshot",
    "DynamicRangeViolation",
    "QuantScheme",
    "design_scales",
    "dither_field",
    "one_bit",
    "quantize_mixed",
    "quantize_scalar",
    "uniform_quantize",
    "CellSubset",
    "HankelView",
    "antidiag_weights",
    "dehankelize",
    "hankel_shape",
    "lift",
    "project",
    "SVDFactors",
    "shrink",
    "svd",
    "CompletionResult",
    "SvtConfig",
    "SvtDivergenceError",
    "build_quantized_hankel",
    "rank_projected_snapshot",
    "svt_complete",
    "svt_iterate",
    "AngleSpectrum",
    "PeakSet",
    "SpectrumSource",
    "angle_spectrum",
    "find_peaks",
    "local_maxima",
    "max_sidelobe_db",
    "Scenario",
    "ScenarioError",
    "bundled_scenario_names",
    "load_bundled",
    "load_scenario",
    "parse_scenario",
    "placement_to_delta",
    "scenario_hash",
    "scenario_to_ini",
    "RunManifest",
    "RunSummary",
    "TheoryBattery",
    "read_snapshot_csv",
    "run_scenario",
    "theory_battery",
    "write_hankel_csv",
    "write_snapshot_csv",
    "__version__",
]
