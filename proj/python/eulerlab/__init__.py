"""Stochastic 2D Euler: spectral truncation, invariant measures, density estimation, grid solver."""

from ._eulerlab import (
    ConfigError,
    InvalidArgument,
    IoError,
    NumericalFailure,
    advection,
    cayley_step,
    cellular_mode,
    drift_divergence,
    energy,
    enstrophy,
    euler_drift,
    im6_residual,
    laplacian,
    modes,
    normalize_config,
    poisson_invert,
    run_experiment,
    shell_spectrum,
    sp4_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
