"""Sparse multipath OFDM channel estimation: generators, estimators, analysis."""

from .analysis import (
    CompressibilityProfile,
    error_variance,
    fairness_index,
    fi_bounds,
    fi_step_assumption_check,
    geometric_bound,
    rho_bar_profile,
)
from .channel import (
    COMPARISON_KINDS,
    DISTRIBUTION_KINDS,
    MMWAVE_KIND,
    ChannelGenConfig,
    DiscreteChannel,
    MpcSet,
    PulseConfig,
    assemble_channel,
    pulse_matrix,
    pulse_vector,
    sample_comparison_channel,
    sample_mpcs,
)
from .estimators import (
    DictionaryConfig,
    EstimateResult,
    ml_full,
    ml_genie,
    omp,
    omp_variance_bound,
    refine_delay,
)
from .exceptions import (
    ConfigurationError,
    DegenerateDictionaryError,
    DimensionError,
    SimulationError,
    UndefinedInputError,
)
from .experiments import (
    EstimatorSpec,
    RhoComparison,
    RhoRecord,
    RunConfig,
    SweepRecord,
    default_estimators,
    paper_scale_config,
    rho_to_csv,
    rho_to_json,
    run_rho_comparison,
    run_snr_sweep,
    small_scale_config,
    snr_db_to_sigma2,
    sweep_to_csv,
    sweep_to_json,
    trial_rng,
)
from .ofdm import (
    OfdmConfig,
    PilotObservation,
    dft_submatrix,
    observe,
    pilot_submatrix,
    sensing_matrix,
    to_frequency,
)

__version__ = "0.1.0"
