"""Coin unitaries: quantized kicked-map coins, CUE samples, file round trips.

Coins act on an even-dimensional space and are always expressed in the
coin momentum basis, the basis in which the walk's step projectors are
diagonal (first half of the indices moves the walker one way, second
half the other).  Provenance is carried alongside the matrix so run
manifests can record where a coin came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    MalformedHeaderError,
    dft_matrix,
    load_cmatrix,
    require_finite,
    save_cmatrix,
)

# Splitting rule for per-task RNG streams in ensembles: stream i of a
# master seed s is s XOR (i * GOLDEN_GAMMA) mod 2**64.
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

UNITARITY_TOL = 1e-8


class OddDimensionError(ValueError):
    """Coin dimension must be even so the step projectors split it in half."""


class NonSquareError(ValueError):
    """A coin file does not contain a square matrix."""


class NonUnitaryError(ValueError):
    """A coin matrix fails the unitarity tolerance."""


@dataclass(frozen=True)
class HarperParams:
    """Kicked-map parameters; doubles as the provenance tag of such coins."""

    g: float
    tau: float = 1.0

    def __post_init__(self):
        if not self.g >= 0.0:
            raise ValueError(f"kick strength g must be >= 0, got {self.g}")
        if not self.tau > 0.0:
            raise ValueError(f"period tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class CueProvenance:
    seed: int


@dataclass(frozen=True)
class CustomProvenance:
    source: str = ""


Provenance = HarperParams | CueProvenance | CustomProvenance


@dataclass(frozen=True)
class CoinUnitary:
    """An even-dimensional unitary coin with provenance.

    The matrix is validated on construction: square, even dimension,
    unitary to ``UNITARITY_TOL`` (generated coins are far tighter, the
    looser bound admits matrices re-read from files).
    """

    matrix: np.ndarray
    provenance: Provenance = field(default_factory=CustomProvenance)

    def __post_init__(self):
        matrix = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        object.__setattr__(self, "matrix", matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise NonSquareError(f"coin matrix must be square, got shape {matrix.shape}")
        m = matrix.shape[0]
        if m < 2 or m % 2 != 0:
            raise OddDimensionError(f"coin dimension must be even and >= 2, got {m}")
        require_finite(matrix, "coin matrix")
        defect = np.max(np.abs(matrix.conj().T @ matrix - np.eye(m)))
        if defect > UNITARITY_TOL:
            raise NonUnitaryError(
                f"coin is not unitary: max |U^dag U - I| = {defect:.3e}"
            )

    @property
    def m(self) -> int:
        return self.matrix.shape[0]


def build_harper(m: int, params: HarperParams) -> CoinUnitary:
    """Quantized kicked-map coin of even dimension ``m``.

    One drive period applies a kinetic phase diagonal in the momentum
    basis, then a kick phase diagonal in the position basis, carried
    into the momentum basis by conjugation with the unitary DFT.  The
    effective Planck constant is 1/m, so ``params.g`` sweeps the
    classical map's integrable-to-chaotic range.
    """
    if m < 2 or m % 2 != 0:
        raise OddDimensionError(f"coin dimension must be even and >= 2, got {m}")
    g, tau = params.g, params.tau
    grid = 2.0 * np.pi * np.arange(m) / m
    kinetic = np.exp(-1j * tau * m * np.cos(grid))
    kick_phase = np.exp(-1j * tau * g * m * np.cos(grid))
    to_position = dft_matrix(m, 1)
    kick = (to_position.conj().T * kick_phase[None, :]) @ to_position
    return CoinUnitary(kick * kinetic[None, :], params)


def sample_cue(m: int, seed: int) -> CoinUnitary:
    """Draw an m x m unitary from the circular unitary ensemble.

    QR of a complex Ginibre matrix with the R-diagonal phases pulled into
    Q, which makes the distribution exactly Haar.  Reproducible: the same
    seed always yields the same matrix.
    """
    if m < 2 or m % 2 != 0:
        raise OddDimensionError(f"coin dimension must be even and >= 2, got {m}")
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    q, r = np.linalg.qr(z / np.sqrt(2.0))
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return CoinUnitary(q, CueProvenance(seed=int(seed)))


def custom_coin(matrix, source: str = "") -> CoinUnitary:
    """Wrap a user-supplied unitary (validated) as a coin."""
    return CoinUnitary(np.asarray(matrix, dtype=np.complex128), CustomProvenance(source))


def ensemble_seeds(master: int, count: int) -> list[int]:
    """Derived seeds for independent ensemble streams.

    seed_i = master XOR (i * GOLDEN_GAMMA) mod 2**64.  Stream 0 is the
    master itself.
    """
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    mask = (1 << 64) - 1
    return [(int(master) ^ ((i * GOLDEN_GAMMA) & mask)) & mask for i in range(count)]


def save_coin(coin: CoinUnitary, path) -> None:
    """Write the coin matrix to a CMX1 file (provenance is not stored)."""
    save_cmatrix(path, coin.matrix)


def load_coin(path) -> CoinUnitary:
    """Read a coin matrix from a CMX1 file and validate it.

    Raises ``MalformedHeaderError`` for a bad container, ``NonSquareError``
    or ``OddDimensionError`` for a matrix of the wrong shape, and
    ``NonUnitaryError`` if unitarity fails at 1e-8.
    """
    matrix = load_cmatrix(path)
    return CoinUnitary(matrix, CustomProvenance(source=str(path)))


__all__ = [
    "GOLDEN_GAMMA",
    "UNITARITY_TOL",
    "CoinUnitary",
    "HarperParams",
    "CueProvenance",
    "CustomProvenance",
    "OddDimensionError",
    "NonSquareError",
    "NonUnitaryError",
    "MalformedHeaderError",
    "build_harper",
    "sample_cue",
    "custom_coin",
    "ensemble_seeds",
    "save_coin",
    "load_coin",
]
