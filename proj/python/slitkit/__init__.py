"""Python access to the slitkit experiments and tip solvers."""

from ._slitkit import (
    ConfigInvalid,
    ExperimentConfig,
    NoBracket,
    SlitkitError,
    __version__,
    experiment_kinds,
    fd_tip_coefficient,
    mobius_factor,
    run,
    run_experiment,
    solve_free_boundary,
    solve_series_2d,
    tip_coefficient,
    u0,
)

__all__ = [
    "ConfigInvalid",
    "ExperimentConfig",
    "NoBracket",
    "SlitkitError",
    "__version__",
    "experiment_kinds",
    "fd_tip_coefficient",
    "mobius_factor",
    "run",
    "run_experiment",
    "solve_free_boundary",
    "solve_series_2d",
    "tip_coefficient",
    "u0",
]
