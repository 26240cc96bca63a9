"""Thermodynamics of pure-decoherence open quantum systems.

Library and CLI computing local (minimal-dissipation) and global
(bath-energy) internal energy, work, heat and entropy production for the
exactly solvable qubit dephasing model, cross-validated against a
finite-bath brute-force oracle.
"""

from .dephasing import (
    SIGMA_Z,
    ModelParams,
    TimeGrid,
    analytic_state,
    analytic_trajectory,
    exact_generator,
    integrate_tcl,
)
from .linops import (
    eig_hermitian,
    partial_trace,
    relative_entropy,
    von_neumann_entropy,
)
from .liouville import (
    DephasingCoefficients,
    LindbladTerm,
    Superoperator,
    apply,
    build_superoperator,
    dephasing_coefficients,
    dephasing_effective_hamiltonian,
    dephasing_superoperator,
    effective_hamiltonian,
    instantaneous_fixed_points,
    to_minimal_dissipation,
)
from .oracle import (
    BathMode,
    FiniteBathEvolution,
    FiniteBathSpec,
    analytic_finite_bath,
    discretize_spectral_density,
    finite_bath_evolve,
    global_quantities_from_joint,
)
from .spectral import (
    SpectralDensity,
    Temperature,
    decoherence_eta,
    interaction_energy,
    markov_rate,
    ohmic_closed_forms,
    quad_semiinfinite,
    rate_gamma,
)
from .thermo import (
    ThermoRecord,
    ThermoTrace,
    clausius_variants,
    dephasing_thermo_trace,
    global_first_law,
    global_quantities,
    local_entropy_production,
    local_entropy_production_rate,
    local_first_law,
)

__version__ = "0.1.0"
