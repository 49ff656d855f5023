"""Random breather Schroedinger operators in finite volume."""

from ._core import (
    ConfigError,
    DomainError,
    NumericalError,
    __version__,
    count_below,
    delta_from_epsilon,
    derive_seed,
    eigenvalues_below,
    epsilon_max,
    ft_eval,
    grid_points,
    k1_constant,
    potential_on_grid,
    run_experiment,
    sample_omega,
    sha256_hex,
    spectral_shift,
    validate_config,
    wegner_constant,
    wegner_rhs,
    weyl_lower_bound,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "NumericalError",
    "__version__",
    "count_below",
    "delta_from_epsilon",
    "derive_seed",
    "eigenvalues_below",
    "epsilon_max",
    "ft_eval",
    "grid_points",
    "k1_constant",
    "potential_on_grid",
    "run_experiment",
    "sample_omega",
    "sha256_hex",
    "spectral_shift",
    "validate_config",
    "wegner_constant",
    "wegner_rhs",
    "weyl_lower_bound",
]
