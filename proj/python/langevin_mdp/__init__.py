"""Moderate deviations of small-mass Langevin dynamics with state-dependent damping."""

from ._core import (
    LmdpError,
    Model,
    __version__,
    builtin_models,
    exceedance,
    exit_rate,
    gramian,
    limit_path,
    mdp_sweep,
    rate_of_path,
    run_cli,
    simulate,
    skeleton_map,
    terminal_rate,
    validate,
)

__all__ = [
    "LmdpError",
    "Model",
    "__version__",
    "builtin_models",
    "exceedance",
    "exit_rate",
    "gramian",
    "limit_path",
    "mdp_sweep",
    "rate_of_path",
    "run_cli",
    "simulate",
    "skeleton_map",
    "terminal_rate",
    "validate",
]
