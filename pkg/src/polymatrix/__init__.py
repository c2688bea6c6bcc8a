"""Uniqueness of Nash equilibria in unconstrained polymatrix games."""
from .constructions import ConstructionKind, ConstructionSpec, construct, verify_construction
from .dynamics import (
    IntegratorConfig,
    Method,
    Trajectory,
    convergence_report,
    energy_series,
    residual_identity_check,
    simulate,
    time_average,
)
from .equilibrium import (
    EquilibriumSet,
    NoEquilibrium,
    NoEquilibriumError,
    NonUnique,
    UniquenessReport,
    Verdict,
    closest_equilibrium,
    equilibrium_set,
    leibniz_det,
    nash_residual,
    solve_unique,
    uniqueness_preconditions,
)
from .game import (
    AgentPartition,
    GameClass,
    PolymatrixGame,
    affine_reduce,
    classify,
    consolidate,
    payoff_field,
    utility,
)
from .sampling import MonteCarloReport, SamplerConfig, mc_unique_fraction, sample_game

__version__ = "0.1.0"

__all__ = [
    "AgentPartition",
    "ConstructionKind",
    "ConstructionSpec",
    "EquilibriumSet",
    "GameClass",
    "IntegratorConfig",
    "Method",
    "MonteCarloReport",
    "NoEquilibrium",
    "NoEquilibriumError",
    "NonUnique",
    "PolymatrixGame",
    "SamplerConfig",
    "Trajectory",
    "UniquenessReport",
    "Verdict",
    "affine_reduce",
    "classify",
    "closest_equilibrium",
    "consolidate",
    "construct",
    "convergence_report",
    "energy_series",
    "equilibrium_set",
    "leibniz_det",
    "mc_unique_fraction",
    "nash_residual",
    "payoff_field",
    "residual_identity_check",
    "sample_game",
    "simulate",
    "solve_unique",
    "time_average",
    "uniqueness_preconditions",
    "utility",
    "verify_construction",
]
