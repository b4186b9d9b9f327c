"""Open-system Mach-Zehnder interferometer simulation and memory-effect metrology."""

from .dephasing import (
    DEFAULT_GRID,
    SPEED_OF_LIGHT,
    PhysicalConfig,
    ReducedConfig,
    TimeGrid,
    Trajectory,
    apply_dephasing,
    kappa,
    kappa_path,
    minus_state,
    path_probability,
    plus_state,
    reduce,
    validate_state,
)
from .errors import (
    DegeneratePath,
    EmptyTrajectory,
    EnsembleFailure,
    FitDiverged,
    GridUnderresolved,
    NonPhysical,
    RedrawExhausted,
)
from .metrology import (
    BlpSensitivityPoint,
    SweepRecord,
    SweepSpec,
    derivative_blp,
    qcrb,
    qfi_closed_form,
    qfi_numeric_oracle,
    sensitivity_blp,
    sensitivity_blp_point,
    sensitivity_probability,
    sweep,
)
from .noisemc import (
    EnsembleResult,
    NoiseConfig,
    ensemble,
    fit_decoherence,
    noisy_trace_distance_trajectory,
    perturb_state,
    substream,
)
from .nonmarkov import (
    BlpResult,
    Classification,
    blp_channel,
    blp_from_samples,
    classify_pair,
    concurrence,
    trace_distance,
)

__version__ = "0.1.0"
