"""Ancilla-free selective quantum process tomography, simulated end to end.

The package represents n-qubit channels, builds the mutually-unbiased-bases
state 2-design, compiles Clifford preparation circuits, and estimates chi
matrix elements and channel fidelities from sampled survival probabilities.
"""
from .channels import (
    ChiMatrix,
    QuantumChannel,
    TargetSupport,
    apply_channel,
    average_fidelity,
    builtin_channel,
    chi_comparison_fidelity,
    chi_from_kraus,
    controlled_uc_unitary,
    kraus_channel,
    kraus_from_chi,
    pauli_basis,
    random_channel,
)
from .circuits import (
    CliffordCircuit,
    Gate,
    PrepProgram,
    apply_circuit,
    compile_prep,
    conjugate_pauli,
    superposition_circuit,
    synthesize_basis_circuit,
)
from .dense import (
    DensityMatrix,
    StateVector,
    basis_probabilities,
    haar_random_state,
    survival_probability,
)
from .errors import (
    InvalidBasisError,
    NotCompletelyPositiveError,
    NumericalIntegrityError,
    UnsupportedSizeError,
)
from .estimator import (
    EstimationResult,
    ExperimentBackend,
    ExperimentSetting,
    SamplingPlan,
    SettingsReport,
    enumerate_settings,
    error_bound,
    estimate_element,
    exact_element,
    fidelity_to_target,
    full_tomography,
)
from .mub import (
    MubBasis,
    MubDesign,
    build_design,
    design_report,
    design_state,
    frame_potential,
    translate,
    validate_design,
)
from .paulis import (
    PauliIndex,
    PauliOperator,
    commutes,
    enumerate_paulis,
    pauli_from_index,
    pauli_from_label,
    pauli_label,
    pauli_multiply,
    pauli_to_index,
    pauli_to_matrix,
)

__version__ = "0.1.0"
