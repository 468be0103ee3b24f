"""Single-step one-control / multi-target controlled-phase gate on qutrits in a cavity."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DimensionLimitError,
    EncodingError,
    GateSimError,
    NumericalError,
    ParameterError,
)
from .operators import (  # noqa: E402
    DensityMatrix,
    HilbertSpace,
    QuantumState,
    annihilation,
    embed,
    kron,
    pure_state_fidelity,
)
from .model import (  # noqa: E402
    DerivedParams,
    SystemParams,
    build_dispersive_hamiltonian,
    build_effective_hamiltonian_encoded,
    build_effective_hamiltonian_full,
    build_full_hamiltonian,
    derive,
    matched_mu,
)
from .gate import (  # noqa: E402
    closed_form_unitary,
    encode,
    ideal_gate_matrix,
    ideal_output_state,
    paper_input_state,
    truth_table_text,
)
from .dynamics import (  # noqa: E402
    EvolutionConfig,
    Trajectory,
    convergence_study,
    evolve_lindblad,
    evolve_schrodinger,
    gate_fidelity_ideal,
    gate_fidelity_lossy,
)
