"""Micromaser photon-statistics toolkit.

Closed-form steady-state photon distributions of a single-atom maser,
simulated probe-atom measurement records over a grid of interaction times,
and iterative maximum-likelihood recovery of the photon number distribution
from those records.
"""

from micromaser.emfit import (
    EmConfig,
    ReconstructionResult,
    em_step,
    log_likelihood,
    reconstruct,
    stationarity_map,
    stationarity_residual,
    uniform_init,
)
from micromaser.harness import (
    ExperimentSpec,
    PipelineReport,
    SweepReport,
    derive_seed,
    preset_spec,
    regime_params,
    repeat_seed,
    run_pipeline,
    run_sweep,
    with_axis_value,
)
from micromaser.kernel import (
    KernelMatrix,
    TauGrid,
    build_kernel,
    excited_probability,
)
from micromaser.mc import (
    RNG_ALGORITHM,
    MeasurementSet,
    binomial_counts,
    from_counts,
    simulate,
)
from micromaser.photon_model import (
    DEFAULT_TAIL_THRESHOLD,
    DEFAULT_TRUNCATION,
    DistributionMetrics,
    MaserParams,
    PhotonDistribution,
    TruncationError,
    fidelity,
    metrics,
    steady_state,
    thermal_distribution,
    trapping_theta,
)
from micromaser.records import TOOL_VERSION as __version__

__all__ = [
    "DEFAULT_TAIL_THRESHOLD",
    "DEFAULT_TRUNCATION",
    "DistributionMetrics",
    "EmConfig",
    "ExperimentSpec",
    "KernelMatrix",
    "MaserParams",
    "MeasurementSet",
    "PhotonDistribution",
    "PipelineReport",
    "ReconstructionResult",
    "RNG_ALGORITHM",
    "SweepReport",
    "TauGrid",
    "TruncationError",
    "binomial_counts",
    "build_kernel",
    "derive_seed",
    "em_step",
    "excited_probability",
    "fidelity",
    "from_counts",
    "log_likelihood",
    "metrics",
    "preset_spec",
    "reconstruct",
    "regime_params",
    "repeat_seed",
    "run_pipeline",
    "run_sweep",
    "simulate",
    "stationarity_map",
    "stationarity_residual",
    "steady_state",
    "thermal_distribution",
    "trapping_theta",
    "uniform_init",
    "with_axis_value",
    "__version__",
]
