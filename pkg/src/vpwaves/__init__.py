"""Traveling waves of the two-species kinetic plasma equations.

The library constructs solitary waves, shock fronts, and periodic wave
trains from velocity marginals, decides when they exist and whether they
are unique, inverts the reduced field equation into spatial profiles,
reconstructs full phase-space distributions, and builds parametrized
families of companion waves. The ``vpwaves`` command line exposes the
same layers on JSON configs; see ``python3 -m vpwaves --help``.
"""
from .model import (
    BoltzmannParams,
    Marginal,
    PlasmaParams,
    TrappedMarginal,
    beta_star,
    check_symmetry,
    marginal_mass,
    symmetry_defect,
)
from .densities import (
    QuadratureSettings,
    integrate_sqrt_singular,
    rho_minus,
    rho_plus_inf,
    rho_plus_trapped,
    rho_shock_plus,
)
from .sagdeev import (
    KinkInfo,
    SagdeevPotential,
    SyntheticPotential,
    TabulatedPotential,
    dv,
    v_infinity,
    v_shock,
    v_total,
    v_trapped,
)
from .conditions import (
    DEGENERATE,
    ClauseCheck,
    ConditionError,
    ConditionReport,
    TailClass,
    UniquenessVerdict,
    beta_sharp,
    check_exists,
    check_quasineutral,
    check_shock_matching,
    classify_tail,
    classify_uniqueness,
    compute_alpha,
)
from .profile import (
    WaveProfile,
    build_shock,
    build_solitary,
    build_train,
    load_profile_csv,
    period,
    profile_to_csv,
    x_of_phi,
)
from .reconstruction import (
    PhaseDistribution,
    density_recovery_error,
    fd_energy_residual,
    marginal_bundle,
    phase_summary_json,
    phase_to_csv,
    reconstruct,
    shock_endstate_map,
    verify_characteristics,
    verify_neutrality,
    verify_poisson,
)
from .families import (
    FamilyMember,
    boltzmann_gamma_star,
    boltzmann_gamma_tilde,
    boltzmann_train_match,
    rescale_to_period,
    solitary_inject_case_b,
    solitary_inject_case_c,
    solitary_perturb,
    train_box_family,
)
from .cases import (
    CaseSetup,
    pinned_values,
    shock_case,
    solitary_case,
    train_case,
)

__version__ = "0.1.0"

__all__ = [
    "BoltzmannParams",
    "CaseSetup",
    "ClauseCheck",
    "ConditionError",
    "ConditionReport",
    "DEGENERATE",
    "FamilyMember",
    "KinkInfo",
    "Marginal",
    "PhaseDistribution",
    "PlasmaParams",
    "QuadratureSettings",
    "SagdeevPotential",
    "SyntheticPotential",
    "TabulatedPotential",
    "TailClass",
    "TrappedMarginal",
    "UniquenessVerdict",
    "WaveProfile",
    "beta_sharp",
    "beta_star",
    "boltzmann_gamma_star",
    "boltzmann_gamma_tilde",
    "boltzmann_train_match",
    "build_shock",
    "build_solitary",
    "build_train",
    "check_exists",
    "check_quasineutral",
    "check_shock_matching",
    "check_symmetry",
    "classify_tail",
    "classify_uniqueness",
    "compute_alpha",
    "density_recovery_error",
    "dv",
    "fd_energy_residual",
    "integrate_sqrt_singular",
    "load_profile_csv",
    "marginal_bundle",
    "marginal_mass",
    "period",
    "phase_summary_json",
    "phase_to_csv",
    "pinned_values",
    "profile_to_csv",
    "reconstruct",
    "rescale_to_period",
    "rho_minus",
    "rho_plus_inf",
    "rho_plus_trapped",
    "rho_shock_plus",
    "shock_case",
    "shock_endstate_map",
    "solitary_case",
    "solitary_inject_case_b",
    "solitary_inject_case_c",
    "solitary_perturb",
    "symmetry_defect",
    "train_box_family",
    "train_case",
    "v_infinity",
    "v_shock",
    "v_total",
    "v_trapped",
    "verify_characteristics",
    "verify_neutrality",
    "verify_poisson",
    "x_of_phi",
]
