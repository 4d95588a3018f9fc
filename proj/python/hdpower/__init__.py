"""Kernel and distance two-sample and independence tests."""

from ._hdpower import (
    ConfigError,
    DegenerateDataError,
    Error,
    InputError,
    InsufficientSampleError,
    ModeError,
    NumericalError,
    PairingError,
    divergence,
    mmd2_diffvar_exact,
    mmd2_diffvar_taylor,
    mmd2_gaussian_exact,
    mmd2_gaussian_taylor,
    mmd2_laplace_exact,
    mmd2_laplace_taylor,
    permutation_test,
    sample,
    statistic,
    wilson_interval,
)

__all__ = [
    "ConfigError",
    "DegenerateDataError",
    "Error",
    "InputError",
    "InsufficientSampleError",
    "ModeError",
    "NumericalError",
    "PairingError",
    "divergence",
    "mmd2_diffvar_exact",
    "mmd2_diffvar_taylor",
    "mmd2_gaussian_exact",
    "mmd2_gaussian_taylor",
    "mmd2_laplace_exact",
    "mmd2_laplace_taylor",
    "permutation_test",
    "sample",
    "statistic",
    "wilson_interval",
]
