"""Density-matrix simulator of coupled spin-1/2 NMR registers, built around
singlet-state initialization: thermal equilibrium in, spin-lock purification,
pseudopure computational states out.

Conventions (binding across the package):

* Spin 1 is the leftmost tensor factor; basis index bits read spin 1 first.
* ``|0>`` is the +1/2 eigenstate of I_z; operators use I_a = sigma_a / 2.
* Hamiltonians are in Hz; free evolution is exp(-i 2 pi H t), pulses are
  exp(-i angle G) for a dimensionless generator G.
* Full density matrices are carried everywhere (no deviation shortcut), and
  thermal polarizations are signed, order 1e-4.
"""

from .analysis import (
    Spectrum,
    coherence_orders,
    correlation,
    diagonal_correlation,
    diagonal_tomography,
    epsilon_prime,
    simulate_spectrum,
    singlet_content,
    spectrum_peaks,
)
from .channels import (
    RelaxationModel,
    SpinLockSpec,
    free_relaxation,
    gradient_crush,
    ideal_singlet_filter,
    noisy_gate,
    spin_lock,
)
from .config import ConfigError, RunConfig, load_config, preset_to_toml
from .dynamics import (
    Hamiltonian,
    Propagator,
    bell_rotation,
    bell_rotation_via_shift,
    cnot,
    effective_hamiltonian,
    not_gate,
    propagate,
    pseudo_hadamard,
    pseudo_hadamard_inverse,
    pulse,
    singlet_order_preparation,
    singlet_readout,
    singlet_to_pseudopure,
    zeeman_hamiltonian,
    zz_evolution,
)
from .presets import Preset, get_preset, preset_names, run_preset
from .protocols import (
    ProtocolResult,
    Stage,
    build_standard_schedule,
    detect_singlet,
    execute_schedule,
    initialize_2q,
    initialize_3q,
    initialize_nq,
    prepare_bell,
    standard_target,
)
from .spinsystem import (
    DensityMatrix,
    SpinSystem,
    basis_index,
    basis_label,
    bell_state,
    collective_operator,
    equilibrium_state,
    partial_trace,
    pseudopure_state,
    singlet_projector,
    singlet_triplet_states,
    spin_operator,
)

__version__ = "0.1.0"

__all__ = [
    "SpinSystem",
    "DensityMatrix",
    "spin_operator",
    "collective_operator",
    "equilibrium_state",
    "pseudopure_state",
    "singlet_triplet_states",
    "singlet_projector",
    "partial_trace",
    "bell_state",
    "basis_index",
    "basis_label",
    "Hamiltonian",
    "Propagator",
    "zeeman_hamiltonian",
    "effective_hamiltonian",
    "propagate",
    "pulse",
    "zz_evolution",
    "singlet_order_preparation",
    "singlet_readout",
    "singlet_to_pseudopure",
    "bell_rotation",
    "bell_rotation_via_shift",
    "cnot",
    "pseudo_hadamard",
    "pseudo_hadamard_inverse",
    "not_gate",
    "RelaxationModel",
    "SpinLockSpec",
    "spin_lock",
    "free_relaxation",
    "gradient_crush",
    "noisy_gate",
    "ideal_singlet_filter",
    "Stage",
    "ProtocolResult",
    "standard_target",
    "build_standard_schedule",
    "execute_schedule",
    "initialize_2q",
    "initialize_3q",
    "initialize_nq",
    "prepare_bell",
    "detect_singlet",
    "correlation",
    "diagonal_correlation",
    "singlet_content",
    "coherence_orders",
    "Spectrum",
    "simulate_spectrum",
    "spectrum_peaks",
    "diagonal_tomography",
    "epsilon_prime",
    "Preset",
    "preset_names",
    "get_preset",
    "run_preset",
    "ConfigError",
    "RunConfig",
    "load_config",
    "preset_to_toml",
    "__version__",
]
