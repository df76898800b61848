"""Quantum discord and entanglement of two atoms in separate lossy dispersive
cavities driven by coherent fields."""

__version__ = "0.1.0"

from .matrix import (
    InvalidStateError,
    check_density_matrix,
    hermitian_eigenvalues,
    kron,
    partial_trace,
    von_neumann_entropy,
)
from .model import (
    CorrelationVector,
    Family,
    PhysicalParams,
    SingleAtomInit,
    WernerSpec,
    asymptotic_magnitude_sq,
    correlation_vector,
    decoherence_factor,
    dispersive_validity,
    single_atom_state,
    two_atom_state,
    werner_initial,
)
from .measures import (
    CorrelationReport,
    Measurement,
    classical_correlation,
    concurrence_general,
    concurrence_model,
    concurrence_xstate,
    conditional_entropy,
    discord_bell_diagonal,
    discord_numeric,
    measure_b,
    mutual_information,
)
from .dynamics import (
    DeathEvent,
    TimeGrid,
    detect_death_intervals,
    emit_csv,
    esd_onset,
    long_time_limits,
    sweep_gamma,
    time_series,
)
