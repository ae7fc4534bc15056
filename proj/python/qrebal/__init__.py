"""Quantum-assisted portfolio rebalancing: Python bindings to the C++ core."""

from ._core import (
    BitSchedule,
    IsingModel,
    QaoaConfig,
    QaoaOutcome,
    QuboProblem,
    UndefinedRatio,
    ValidationError,
    __version__,
    angular_distance,
    backtest,
    brute_force,
    build_qubo,
    candidate_dates,
    ensemble,
    ga_optimise,
    ledoit_wolf,
    metrics,
    minvar,
    optimise_angles,
    qubo_energy,
    run_pipeline,
    synth_panel,
    to_ising,
    walk_forward,
    ward_cluster,
)

__all__ = [
    "BitSchedule",
    "IsingModel",
    "QaoaConfig",
    "QaoaOutcome",
    "QuboProblem",
    "UndefinedRatio",
    "ValidationError",
    "__version__",
    "angular_distance",
    "backtest",
    "brute_force",
    "build_qubo",
    "candidate_dates",
    "ensemble",
    "ga_optimise",
    "ledoit_wolf",
    "metrics",
    "minvar",
    "optimise_angles",
    "qubo_energy",
    "run_pipeline",
    "synth_panel",
    "to_ising",
    "walk_forward",
    "ward_cluster",
]
