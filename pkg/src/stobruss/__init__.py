"""Stochastic Brusselator laboratory.

Spectral stability certificates, Euler-Maruyama field and mode solvers,
Lyapunov-exponent estimation and seeded CSV-emitting experiment presets.
The sklearn wrappers live in :mod:`stobruss.estimators` and are not
imported here.
"""
from .analysis import (
    EnsembleLyapunov,
    LyapunovEstimate,
    ensemble_lyapunov,
    fit_lyapunov,
    per_mode_lyapunov,
    project_modes,
    reconstruct_field,
    sigma_sweep,
)
from .config import ExperimentConfig, build_config, parse_config
from .exceptions import (
    ConfigError,
    ConsistencyError,
    DegenerateTrajectoryError,
    IntegrationFault,
    InvalidArgumentError,
    ModeTruncationError,
    NonCommutingError,
    StobrussError,
)
from .model import BrusselatorParams, equilibrium, linearize, reaction_terms
from .presets import run_preset
from .sde import (
    FieldState,
    SpatialGrid,
    TimeGrid,
    initial_condition,
    simulate_field,
    simulate_field_ensemble,
    simulate_mode,
)
from .spectral import (
    critical_sigma_same,
    deterministic_unstable_band,
    dispersion,
    eig2,
    expm2,
    lemma1_certificate,
    neumann_eigenpairs,
)
from .tables import ResultTable, write_csv

__version__ = "0.1.0"
