"""Excitation transfer along dipole-coupled spin-1/2 chains.

The package simulates one-excitation transfer along planar spin-1/2 chains
governed by the XXZ Hamiltonian with geometric dipole-dipole couplings,
truncated to any number M of index neighbors.  It provides chain builders
(zigzag, alternating, custom), exact one-excitation evolution via spectral
decomposition, transfer figures of merit (windowed optimum, time-averaged
integrals, minimal faithful neighbor window), parameter-space sweeps, and a
brute-force full-Hilbert-space reference used to validate the reduction.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateGeometryError,
    DipoleChainError,
    InvalidAlternationError,
    InvalidChainError,
    InvalidMatrixError,
    InvalidPairError,
    InvalidWindowError,
    SizeLimitError,
    UndefinedRatioError,
)
from .geometry import (
    ALTERNATING,
    CUSTOM,
    ZIGZAG,
    FieldOrientation,
    NodeList,
    alternating_nodes,
    chain_length,
    pair_geometry,
    read_nodes,
    write_nodes,
    zigzag_nodes,
)
from .hamiltonian import (
    ALTERNATING_TIME,
    MAGIC_ANGLE,
    ZIGZAG_TIME,
    CouplingMatrix,
    Hamiltonian1Ex,
    coupling,
    coupling_matrix,
    one_excitation_hamiltonian,
    write_matrix_csv,
)
from .dynamics import (
    SpectralDecomposition,
    TransferAmplitude,
    chain_decomposition,
    fidelity,
    probability_trace,
    probability_traces,
    spectral,
    transfer_amplitude,
    transfer_probability,
    uniform_trace,
    write_trace_csv,
)
from .metrics import (
    ApproxReport,
    TransferOptimum,
    approx_report,
    default_window,
    first_return_period,
    j_integral,
    j_ratio,
    max_probability,
    minimal_m,
    sampling_step,
    write_approx_csv,
)
from .sweep import (
    Axis,
    SweepGrid,
    SweepRecord,
    SweepResult,
    locate_optimum,
    run_sweep,
    sweep_alternating,
    sweep_zigzag,
    write_sweep_csv,
    write_sweep_meta,
)
from .oracle import (
    FullStateVector,
    full_hamiltonian,
    full_space_probability,
    full_space_trace,
    single_excitation_state,
    total_z_operator,
)
