"""qcopies: minimum measurement-copy budgeting for certifying multi-qubit
Schrodinger-cat entanglement by fidelity, with Monte Carlo verification,
adaptive feedback, Hoeffding guarantees and phaselift tomography.
"""

from .adaptive import (
    AdaptiveConfig,
    AdaptiveState,
    geometric_schedule,
    protocol_timeline,
    run_adaptive,
    sweep_epsilon_ratio,
)
from .allocator import (
    BudgetProblem,
    CopyAllocation,
    EIGHT_PHOTON_EXPERIMENT_COPIES,
    EIGHT_PHOTON_MEASURED_P,
    EIGHT_PHOTON_REPORTED_OPTIMUM,
    EIGHT_PHOTON_UNIFORM_COPIES,
    allocate_sc,
    allocate_tomography_nonorthogonal,
    allocate_tomography_orthogonal,
    explicit_allocation,
    sc_variance_weights,
    solve_budget,
    uniform_allocation,
)
from .cli import TenPhotonCost, ten_photon_cost
from .core import (
    DensityMatrix,
    PureState,
    density_from_json,
    density_to_json,
    depolarized_sc,
    fidelity_pure,
    frobenius_distance,
    kron,
    kron_all,
    noisy_sc_state,
    psd_project,
    pure_density,
    rank_two_sc_state,
    sc_state,
    white_noise_mix,
    white_noise_weight_for_fidelity,
)
from .errors import (
    ConfigError,
    DegenerateProblemError,
    DimensionMismatchError,
    InfeasibleAfterRelaxationError,
    QcopiesError,
)
from .hoeffding import (
    AllocationInterval,
    ConfidenceSpec,
    CoverageTable,
    allocation_interval,
    coverage_experiment,
    failure_probability,
    hoeffding_radius,
    joint_success,
    required_copies,
)
from .phaselift import (
    PauliSetting,
    PovmElement,
    ProjectorSetting,
    ReconstructOptions,
    ReconstructionResult,
    exact_frequencies,
    pauli_settings,
    reconstruct,
    reconstruct_elements,
    reconstruction_curve,
    sampled_frequencies,
    tomography_projectors,
)
from .simulator import (
    ComparisonReport,
    CountTable,
    HistogramSpec,
    RngSeed,
    compare_distributions,
    estimate_fidelity,
    probabilities_from_tables,
    run_histogram_experiment,
    sample_counts,
    sample_setting,
)
from .witness import (
    MeasurementSetting,
    SettingProbabilities,
    WitnessDecomposition,
    build_settings,
    delta_f,
    fidelity_from_probabilities,
    setting_probabilities,
    witness_expectation,
)

__version__ = "0.1.0"
