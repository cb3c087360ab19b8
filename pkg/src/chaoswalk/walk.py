"""Coined quantum walk on a cyclic lattice, evolved sector by sector.

The walk unitary couples an even-dimensional coin to a ring of sites.
Walker translation symmetry block-diagonalizes it: for a walker that
starts in a definite site and the coin in a definite basis state, the
whole evolution is carried by one m-vector per walker momentum sector,

    vectors[k](t) = (D_k U_C)^t e_alpha,

where D_k multiplies the first m/2 coin components by exp(+2i pi k/N)
and the rest by exp(-2i pi k/N).  Under the package's momentum-to-
position sign convention the first-half components move the walker by
+1 per step and the second half by -1.  All reduced densities and site
distributions are cheap functions of these sector vectors; a dense
(m*n)-dimensional oracle is kept for cross-checks at small sizes.

Site readouts use centered labels -floor(N/2) .. ceil(N/2)-1.  A walker
that starts away from site 0 is handled by relabeling the readout (an
exact cyclic roll), never by phasing the internal state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .coins import CoinUnitary, custom_coin
from .linalg import MalformedHeaderError, require_finite

logger = logging.getLogger(__name__)

# Dense-oracle and path-enumeration guards: these routes are for
# validating the sector route at small sizes, not for production runs.
FULL_SPACE_LIMIT = 4096
PATH_SUM_LIMIT = 20

# Probability hygiene: rounding can push a probability a hair below
# zero; anything in [CLAMP_FLOOR, 0) is clamped silently, anything in
# [HARD_FLOOR, CLAMP_FLOOR) is clamped with a warning, and below
# HARD_FLOOR is a genuine numerical failure.
CLAMP_FLOOR = -1e-12
HARD_FLOOR = -1e-9

_SEC1_MAGIC = b"SEC1"


class NumericGuardError(FloatingPointError):
    """A quantity left its numerically safe range (norms, probabilities)."""


class OracleSizeError(ValueError):
    """Dense full-space route requested beyond its size guard."""


class PathDepthError(ValueError):
    """Path enumeration requested beyond its depth guard."""


@dataclass(frozen=True)
class WalkConfig:
    """Geometry and initial condition of one walk."""

    coin: CoinUnitary
    n_sites: int
    initial_coin: int = 0
    initial_site: int = 0

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError(f"need at least 2 sites, got {self.n_sites}")
        if not 0 <= self.initial_coin < self.coin.m:
            raise ValueError(
                f"initial_coin {self.initial_coin} out of range for m={self.coin.m}"
            )
        object.__setattr__(self, "initial_site", self.initial_site % self.n_sites)


@dataclass(frozen=True)
class SectorState:
    """Per-sector coin vectors at one time.

    ``vectors[k]`` is the coin vector of walker-momentum sector ``k``;
    every row has unit norm.  ``origin`` is the starting site, applied
    as a readout relabeling.
    """

    t: int
    vectors: np.ndarray
    origin: int = 0

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.complex128)
        object.__setattr__(self, "vectors", vectors)
        if vectors.ndim != 2:
            raise ValueError(f"sector vectors must be 2-d, got shape {vectors.shape}")
        require_finite(vectors, "sector vectors")

    @property
    def n_sites(self) -> int:
        return self.vectors.shape[0]

    @property
    def m(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class ReducedDensity:
    """A validated reduced density matrix of the coin or the walker."""

    subsystem: str  # 'coin' | 'walker_momentum' | 'walker_position'
    matrix: np.ndarray
    t: int

    def __post_init__(self):
        matrix = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        object.__setattr__(self, "matrix", matrix)
        require_finite(matrix, "density matrix")
        defect = np.max(np.abs(matrix - matrix.conj().T))
        if defect > 1e-10:
            raise NumericGuardError(f"density not Hermitian: defect {defect:.3e}")
        tr = np.trace(matrix).real
        if abs(tr - 1.0) > 1e-10:
            raise NumericGuardError(f"density trace {tr!r} differs from 1")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class PositionDistribution:
    """Site probabilities at one time, stored in ring order (index = site)."""

    t: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        total = probs.sum()
        if abs(total - 1.0) > 1e-10:
            raise NumericGuardError(f"probabilities sum to {total!r}, not 1")

    @property
    def n_sites(self) -> int:
        return self.probs.shape[0]

    def centered(self) -> tuple[np.ndarray, np.ndarray]:
        """(labels, probabilities) with labels -floor(N/2) .. ceil(N/2)-1."""
        n = self.n_sites
        labels = np.arange(n) - n // 2
        return labels, np.roll(self.probs, n // 2)


def site_labels(n_sites: int) -> np.ndarray:
    return np.arange(n_sites) - n_sites // 2


def clean_probabilities(raw: np.ndarray) -> np.ndarray:
    """Clamp tiny negative probabilities, hard-fail genuine ones."""
    raw = np.asarray(raw, dtype=np.float64)
    require_finite(raw, "probabilities")
    low = raw.min() if raw.size else 0.0
    if low < HARD_FLOOR:
        raise NumericGuardError(f"probability {low!r} below hard floor {HARD_FLOOR}")
    if low < CLAMP_FLOOR:
        logger.warning("clamping probability %r to 0", low)
    return np.where(raw < 0.0, 0.0, raw)


def sector_blocks(config: WalkConfig) -> np.ndarray:
    """The (n_sites, m, m) stack of per-sector one-step unitaries."""
    m, n = config.coin.m, config.n_sites
    k = np.arange(n)
    plus = np.exp(2j * np.pi * k / n)
    phases = np.empty((n, m), dtype=np.complex128)
    phases[:, : m // 2] = plus[:, None]
    phases[:, m // 2 :] = plus.conj()[:, None]
    return phases[:, :, None] * config.coin.matrix[None, :, :]


def initial_state(config: WalkConfig) -> SectorState:
    vectors = np.zeros((config.n_sites, config.coin.m), dtype=np.complex128)
    vectors[:, config.initial_coin] = 1.0
    return SectorState(t=0, vectors=vectors, origin=config.initial_site)


def evolve(state: SectorState, blocks: np.ndarray, steps: int) -> SectorState:
    """Advance ``steps`` steps by repeated per-sector matrix-vector products.

    Matrix powers are never formed.  Sector norms are checked afterwards;
    drift beyond 1e-9 raises ``NumericGuardError``.
    """
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    blocks = np.ascontiguousarray(blocks, dtype=np.complex128)
    if blocks.shape != (state.n_sites, state.m, state.m):
        raise ValueError(
            f"blocks shape {blocks.shape} does not match state ({state.n_sites}, {state.m})"
        )
    vectors = kernels.evolve_sector_vectors(blocks, state.vectors, steps)
    require_finite(vectors, "evolved sector vectors")
    norms = np.linalg.norm(vectors, axis=1)
    drift = np.max(np.abs(norms - 1.0))
    if drift > 1e-9:
        raise NumericGuardError(f"sector norm drifted by {drift:.3e} after {steps} steps")
    return SectorState(t=state.t + steps, vectors=vectors, origin=state.origin)


def coin_density(state: SectorState) -> ReducedDensity:
    """Coin reduced density matrix: the sector average of projectors."""
    rho = (state.vectors.T @ state.vectors.conj()) / state.n_sites
    return ReducedDensity("coin", rho, state.t)


def walker_density(state: SectorState, basis: str = "position") -> ReducedDensity:
    """Walker reduced density matrix in the momentum or position basis.

    Momentum entries are sector-vector overlaps over N.  The position
    form conjugates by the unitary DFT (momentum-to-position sign) and
    is then rolled to the walk's origin.
    """
    n = state.n_sites
    mom = (state.vectors @ state.vectors.conj().T) / n
    if basis == "momentum":
        return ReducedDensity("walker_momentum", mom, state.t)
    if basis != "position":
        raise ValueError(f"basis must be 'position' or 'momentum', got {basis!r}")
    pos = np.fft.ifft(np.fft.fft(mom, axis=0, norm="ortho"), axis=1, norm="ortho")
    pos = np.roll(pos, (state.origin, state.origin), axis=(0, 1))
    return ReducedDensity("walker_position", pos, state.t)


def position_distribution(state: SectorState) -> PositionDistribution:
    """Site probabilities, computed from position amplitudes directly.

    Equals the diagonal of the position-basis walker density; the
    amplitude route keeps it non-negative by construction.
    """
    amps = np.fft.fft(state.vectors, axis=0) / state.n_sites
    probs = np.einsum("na,na->n", amps, amps.conj()).real
    probs = np.roll(probs, state.origin)
    return PositionDistribution(t=state.t, probs=clean_probabilities(probs))


def step_operators(coin: CoinUnitary) -> tuple[np.ndarray, np.ndarray]:
    """(move +1, move -1) halves of the coin: P_first U_C and P_second U_C."""
    m = coin.m
    u_plus = coin.matrix.copy()
    u_plus[m // 2 :, :] = 0.0
    u_minus = coin.matrix.copy()
    u_minus[: m // 2, :] = 0.0
    return u_plus, u_minus


def path_sum_distribution(
    coin: CoinUnitary, n_sites: int, t: int, initial_coin: int = 0, initial_site: int = 0
) -> PositionDistribution:
    """Site distribution from the exact sum over displacement histories.

    Dynamic programming over net displacement: amplitudes for all
    length-t products of the two half-coin step operators, folded onto
    the ring.  Independent of the momentum-sector route (no Fourier
    transforms), so it serves as a second oracle.  Guarded to t <= 20.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if t > PATH_SUM_LIMIT:
        raise PathDepthError(f"path enumeration guarded to t <= {PATH_SUM_LIMIT}, got {t}")
    m = coin.m
    if not 0 <= initial_coin < m:
        raise ValueError(f"initial_coin {initial_coin} out of range for m={m}")
    u_plus, u_minus = step_operators(coin)
    # amps[j] holds the coin vector reached with net displacement j - t
    amps = np.zeros((2 * t + 1, m), dtype=np.complex128)
    amps[t, initial_coin] = 1.0
    for _ in range(t):
        shifted_up = np.zeros_like(amps)
        shifted_up[1:] = amps[:-1] @ u_plus.T
        shifted_down = np.zeros_like(amps)
        shifted_down[:-1] = amps[1:] @ u_minus.T
        amps = shifted_up + shifted_down
    probs = np.zeros(n_sites, dtype=np.float64)
    weights = np.einsum("da,da->d", amps, amps.conj()).real
    for j, w in enumerate(weights):
        probs[(initial_site + (j - t)) % n_sites] += w
    return PositionDistribution(t=t, probs=clean_probabilities(probs))


def full_space_unitary(config: WalkConfig) -> np.ndarray:
    """Dense one-step unitary on the (m*n)-dimensional product space.

    Index layout is coin-major: basis state alpha*n + site.  The
    first-half coin block is paired with the +1 site shift, matching the
    sector phase assignment exactly (not merely up to relabeling).
    Guarded to m*n <= FULL_SPACE_LIMIT.
    """
    m, n = config.coin.m, config.n_sites
    if m * n > FULL_SPACE_LIMIT:
        raise OracleSizeError(
            f"dense oracle guarded to m*n <= {FULL_SPACE_LIMIT}, got {m * n}"
        )
    shift_up = np.roll(np.eye(n), 1, axis=0)  # |site> -> |site+1>
    p_first = np.zeros((m, m))
    p_first[: m // 2, : m // 2] = np.eye(m // 2)
    p_second = np.eye(m) - p_first
    move = np.kron(p_first, shift_up) + np.kron(p_second, shift_up.T)
    return move @ np.kron(config.coin.matrix, np.eye(n))


def full_space_evolve(config: WalkConfig, steps: int) -> np.ndarray:
    """Evolve the dense product-space state vector by repeated matvec."""
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    u = full_space_unitary(config)
    n = config.n_sites
    psi = np.zeros(config.coin.m * n, dtype=np.complex128)
    psi[config.initial_coin * n + config.initial_site] = 1.0
    for _ in range(steps):
        psi = u @ psi
    return require_finite(psi, "dense state")


def full_space_densities(psi: np.ndarray, m: int, n: int, t: int = 0):
    """(coin, walker-position) reduced densities of a dense pure state."""
    a = np.ascontiguousarray(psi, dtype=np.complex128).reshape(m, n)
    rho_coin = a @ a.conj().T
    rho_walk = a.T @ a.conj()
    return (
        ReducedDensity("coin", rho_coin, t),
        ReducedDensity("walker_position", rho_walk, t),
    )


def full_space_distribution(psi: np.ndarray, m: int, n: int, t: int = 0) -> PositionDistribution:
    a = np.ascontiguousarray(psi, dtype=np.complex128).reshape(m, n)
    probs = np.einsum("an,an->n", a, a.conj()).real
    return PositionDistribution(t=t, probs=clean_probabilities(probs))


def save_sector_state(state: SectorState, path) -> None:
    """Checkpoint a sector state: 'SEC1 <N> <M> <t>' header plus raw vectors.

    The origin is not stored; it belongs to the run configuration.
    """
    with open(path, "wb") as fh:
        fh.write(b"%s %d %d %d\n" % (_SEC1_MAGIC, state.n_sites, state.m, state.t))
        fh.write(state.vectors.astype("<c16", copy=False).tobytes(order="C"))


def load_sector_state(path, origin: int = 0) -> SectorState:
    with open(path, "rb") as fh:
        header = fh.readline(128)
        payload = fh.read()
    parts = header.split()
    if len(parts) != 4 or parts[0] != _SEC1_MAGIC or not header.endswith(b"\n"):
        raise MalformedHeaderError(f"bad SEC1 header: {header!r}")
    try:
        n, m, t = (int(p) for p in parts[1:])
    except ValueError as exc:
        raise MalformedHeaderError(f"bad SEC1 dimensions: {header!r}") from exc
    if n < 0 or m < 0 or t < 0 or len(payload) != n * m * 16:
        raise MalformedHeaderError(
            f"SEC1 payload is {len(payload)} bytes, header promises {n * m * 16}"
        )
    vectors = np.frombuffer(payload, dtype="<c16").astype(np.complex128).reshape(n, m)
    return SectorState(t=t, vectors=vectors, origin=origin)
