"""Coined quantum walks on a ring with chaotic coins.

Sector-resolved evolution of a coin-walker product state, classical
reference walks and map diagnostics, entanglement and spectral
observables, and a small experiment runner behind the ``chaoswalk``
command line tool.
"""

__version__ = "0.1.0"

from .coins import (
    CoinUnitary,
    HarperParams,
    NonSquareError,
    NonUnitaryError,
    OddDimensionError,
    build_harper,
    custom_coin,
    ensemble_seeds,
    load_coin,
    sample_cue,
    save_coin,
)
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .harper_map import (
    PhasePoint,
    classical_step,
    coverage_fraction,
    lyapunov_estimate,
    orbit,
    phase_portrait,
)
from .kernels import BACKEND
from .linalg import (
    DimensionMismatchError,
    MalformedHeaderError,
    NonFiniteError,
    NotHermitianError,
    dft,
    dft_matrix,
    eigh,
    load_cmatrix,
    matmul,
    matvec,
    save_cmatrix,
)
from .observables import (
    EntropySeries,
    FidelityMatrix,
    SpectralPool,
    binomial_prediction,
    density_spectrum,
    diffusive_time,
    distribution_distance,
    fgr_fidelity,
    fidelity_matrix,
    growth_exponent,
    has_saturated,
    ks_to_mp,
    mean_position,
    mp_cdf,
    mp_density,
    mp_support,
    normal_prediction,
    page_value,
    pool_spectra,
    shannon_entropy,
    shannon_entropy_asymptote,
    variance,
    von_neumann_entropy,
)
from .classical_walk import exact_counts, exact_evolve, mc_evolve
from .walk import (
    NumericGuardError,
    OracleSizeError,
    PathDepthError,
    PositionDistribution,
    ReducedDensity,
    SectorState,
    WalkConfig,
    coin_density,
    evolve,
    initial_state,
    load_sector_state,
    path_sum_distribution,
    position_distribution,
    save_sector_state,
    sector_blocks,
    walker_density,
)

__all__ = [
    "__version__",
    "BACKEND",
    # coins
    "CoinUnitary",
    "HarperParams",
    "NonSquareError",
    "NonUnitaryError",
    "OddDimensionError",
    "build_harper",
    "custom_coin",
    "ensemble_seeds",
    "load_coin",
    "sample_cue",
    "save_coin",
    # config
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    # classical map
    "PhasePoint",
    "classical_step",
    "coverage_fraction",
    "lyapunov_estimate",
    "orbit",
    "phase_portrait",
    # linear algebra
    "DimensionMismatchError",
    "MalformedHeaderError",
    "NonFiniteError",
    "NotHermitianError",
    "dft",
    "dft_matrix",
    "eigh",
    "load_cmatrix",
    "matmul",
    "matvec",
    "save_cmatrix",
    # observables
    "EntropySeries",
    "FidelityMatrix",
    "SpectralPool",
    "binomial_prediction",
    "density_spectrum",
    "diffusive_time",
    "distribution_distance",
    "fgr_fidelity",
    "fidelity_matrix",
    "growth_exponent",
    "has_saturated",
    "ks_to_mp",
    "mean_position",
    "mp_cdf",
    "mp_density",
    "mp_support",
    "normal_prediction",
    "page_value",
    "pool_spectra",
    "shannon_entropy",
    "shannon_entropy_asymptote",
    "variance",
    "von_neumann_entropy",
    # classical walk
    "exact_counts",
    "exact_evolve",
    "mc_evolve",
    # walk
    "NumericGuardError",
    "OracleSizeError",
    "PathDepthError",
    "PositionDistribution",
    "ReducedDensity",
    "SectorState",
    "WalkConfig",
    "coin_density",
    "evolve",
    "initial_state",
    "load_sector_state",
    "path_sum_distribution",
    "position_distribution",
    "save_sector_state",
    "sector_blocks",
    "walker_density",
]
