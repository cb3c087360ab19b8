"""Observables of the walk: spread, fidelity decay, entropies, spectra.

Everything here is a pure function of states, densities or distributions
produced by the walk module (or of plain parameters, for the analytic
reference curves).  The random-matrix reference spectrum and its CDF are
evaluated by quadrature, not sampling.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .linalg import eigh
from .walk import (
    NumericGuardError,
    PositionDistribution,
    ReducedDensity,
    SectorState,
    clean_probabilities,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FidelityMatrix:
    """Pairwise sector-evolution overlaps at one time.

    ``matrix[l, k]`` is the overlap between the sector-l and sector-k
    evolutions of the initial coin state.  Unit diagonal, conjugate
    symmetric, entries bounded by 1 in magnitude (all to rounding).
    """

    t: int
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        object.__setattr__(self, "matrix", matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"overlap matrix must be square, got {matrix.shape}")
        if np.max(np.abs(np.diagonal(matrix) - 1.0)) > 1e-10:
            raise NumericGuardError("overlap diagonal differs from 1")
        if np.max(np.abs(matrix - matrix.conj().T)) > 1e-10:
            raise NumericGuardError("overlap matrix lost conjugate symmetry")
        if np.max(np.abs(matrix)) > 1.0 + 1e-10:
            raise NumericGuardError("overlap magnitude exceeds 1")

    @property
    def n_sectors(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EntropySeries:
    """Quantum and classical entropies sampled on a shared time grid."""

    times: np.ndarray
    s_quantum: np.ndarray
    s_classical: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.int64)
        s_q = np.asarray(self.s_quantum, dtype=np.float64)
        s_c = np.asarray(self.s_classical, dtype=np.float64)
        if not (times.shape == s_q.shape == s_c.shape) or times.ndim != 1:
            raise ValueError("times and entropy arrays must be matching 1-d arrays")
        if s_q.size and s_q.min() < -1e-12:
            raise NumericGuardError(f"negative quantum entropy {s_q.min()!r}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "s_quantum", s_q)
        object.__setattr__(self, "s_classical", s_c)


@dataclass(frozen=True)
class SpectralPool:
    """Eigenvalues pooled from reduced densities over a time window."""

    eigenvalues: np.ndarray
    dim: int
    n_matrices: int
    window: tuple[int, int]


# ---------------------------------------------------------------- spread


def mean_position(dist: PositionDistribution) -> float:
    labels, probs = dist.centered()
    return float(np.dot(labels, probs))


def variance(dist: PositionDistribution) -> float:
    """Position variance over centered site labels."""
    labels, probs = dist.centered()
    mu = float(np.dot(labels, probs))
    return float(np.dot((labels - mu) ** 2, probs))


def growth_exponent(times, variances, t_lo: int, t_hi: int) -> float:
    """Least-squares slope of log variance against log time on [t_lo, t_hi]."""
    times = np.asarray(times, dtype=np.float64)
    variances = np.asarray(variances, dtype=np.float64)
    mask = (times >= t_lo) & (times <= t_hi) & (variances > 0) & (times > 0)
    if mask.sum() < 2:
        raise ValueError("not enough points in the fit window")
    slope, _ = np.polyfit(np.log(times[mask]), np.log(variances[mask]), 1)
    return float(slope)


def diffusive_time(
    times,
    variances,
    rel_tol: float = 0.1,
    persistence: int = 5,
    fit_window: tuple[int, int] = (1, 5),
) -> int | None:
    """First time the spread leaves the linear-growth law for good.

    A line var = t + c is anchored on the early window (slope fixed to
    the unbiased-step value 1, intercept fitted), and the detector
    returns the first time whose relative deviation exceeds ``rel_tol``
    and stays above it for ``persistence`` consecutive samples.  None if
    the series never sustains a deviation.  The 10% default keeps the
    detected onset at half the coin dimension across sizes; looser
    settings lag the crossover on small rings.
    """
    times = np.asarray(times, dtype=np.int64)
    variances = np.asarray(variances, dtype=np.float64)
    lo, hi = fit_window
    anchor = (times >= lo) & (times <= hi)
    if not anchor.any():
        raise ValueError("no samples in the intercept fit window")
    c = float(np.mean(variances[anchor] - times[anchor]))
    expected = times + c
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(variances - expected) / np.abs(expected)
    over = rel > rel_tol
    run = 0
    for i in range(len(times)):
        run = run + 1 if over[i] else 0
        if run >= persistence:
            return int(times[i - persistence + 1])
    return None


def has_saturated(times, values, window: int = 100, rel_tol: float = 0.05) -> bool:
    """True when the mean over the last window grew by at most ``rel_tol``
    relative to the mean over the window before it."""
    times = np.asarray(times, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    t_end = int(times.max())
    last = values[(times > t_end - window)]
    prev = values[(times > t_end - 2 * window) & (times <= t_end - window)]
    if len(last) == 0 or len(prev) == 0:
        raise ValueError("series too short for the saturation windows")
    ref = float(np.mean(last))
    if ref == 0.0:
        return True
    return abs(ref - float(np.mean(prev))) <= rel_tol * abs(ref)


# ------------------------------------------------------------- fidelity


def fidelity_matrix(state: SectorState) -> FidelityMatrix:
    """Overlaps matrix[l, k] = <sector l | sector k> at the state's time.

    Equals N times the transposed momentum-basis walker density.  The
    sector-separation dependence of these overlaps is the echo-decay
    observable; ``fgr_fidelity`` gives its perturbative prediction.
    """
    return FidelityMatrix(t=state.t, matrix=state.vectors.conj() @ state.vectors.T)


def fgr_fidelity(delta: int, n_sites: int, t: int) -> tuple[float, float]:
    """Reference echo-decay pair for sector separation ``delta``.

    Returns (cos form, golden-rule exponential form):
    cos(2 pi delta/N)**t and exp(-2 pi^2 delta^2 t / N^2).  The two agree
    when delta/N is small.
    """
    angle = 2.0 * math.pi * delta / n_sites
    return (
        math.cos(angle) ** t,
        math.exp(-2.0 * math.pi**2 * delta**2 * t / n_sites**2),
    )


# ---------------------------------------------------- reference profiles


def binomial_prediction(n_sites: int, t: int, initial_site: int = 0) -> PositionDistribution:
    """Unbiased classical walk profile wrapped onto the ring (exact)."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    probs = np.zeros(n_sites, dtype=np.float64)
    scale = 2**t
    for r in range(t + 1):
        probs[(initial_site + 2 * r - t) % n_sites] += math.comb(t, r) / scale
    return PositionDistribution(t=t, probs=probs)


def normal_prediction(n_sites: int, t: int, initial_site: int = 0) -> PositionDistribution:
    """Parity-corrected Gaussian profile of the classical walk on the ring.

    Weight [1 + (-1)**(d + t)] exp(-d^2 / 2t) on centered displacements
    d, folded onto the ring and normalized.  Only displacements with
    d + t even carry weight, matching the walk's sublattice structure.
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    probs = np.zeros(n_sites, dtype=np.float64)
    for d in range(-(n_sites // 2), n_sites - n_sites // 2):
        parity = 1.0 + (-1.0) ** ((d + t) % 2)
        if parity:
            probs[(initial_site + d) % n_sites] += parity * math.exp(-d * d / (2.0 * t))
    total = probs.sum()
    if total <= 0.0:
        raise NumericGuardError("degenerate normal profile")
    return PositionDistribution(t=t, probs=probs / total)


# ------------------------------------------------------------- entropies


def density_spectrum(rho: ReducedDensity) -> np.ndarray:
    """Ascending eigenvalues of a density matrix, clamped into [0, 1].

    Clamps beyond 1e-12 are logged; a spectrum escaping [0, 1] by more
    than 1e-9 is a numerical failure, not noise.
    """
    values = eigh(rho.matrix).values
    low, high = float(values.min()), float(values.max())
    if low < -1e-9 or high > 1.0 + 1e-9:
        raise NumericGuardError(
            f"density spectrum outside [0, 1]: min {low:.3e}, max {high:.3e}"
        )
    if low < -1e-12:
        logger.warning("clamping density eigenvalue %r to 0", low)
    return np.clip(values, 0.0, 1.0)


def von_neumann_entropy(rho: ReducedDensity) -> float:
    """Entanglement entropy -sum(lam ln lam) in nats."""
    lam = density_spectrum(rho)
    lam = lam[lam > 0.0]
    return float(-(lam * np.log(lam)).sum())


def shannon_entropy(dist: PositionDistribution) -> float:
    """Site-distribution entropy -sum(p ln p) in nats."""
    p = dist.probs[dist.probs > 0.0]
    return float(-(p * np.log(p)).sum())


def shannon_entropy_asymptote(t: int) -> float:
    """Large-t entropy of the unwrapped classical walk, 0.5 ln(pi e t/2)."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    return 0.5 * math.log(math.pi * math.e * t / 2.0)


def page_value(n1: int, n2: int) -> float:
    """Mean entanglement entropy of a random pure state, ln n1 - n1/(2 n2).

    ``n1`` is the smaller subsystem; arguments given the other way round
    are swapped with a warning.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError(f"dimensions must be positive, got {n1}, {n2}")
    if n1 > n2:
        logger.warning("page_value expects n1 <= n2, swapping (%d, %d)", n1, n2)
        n1, n2 = n2, n1
    return math.log(n1) - n1 / (2.0 * n2)


# ----------------------------------------------------- spectral statistics


def mp_support(n1: int, n2: int) -> tuple[float, float]:
    """Support of the trace-normalized random-spectrum law, (1/n1)(1 + 1/Q -+ 2/sqrt(Q))."""
    if n1 < 1 or n2 < n1:
        raise ValueError(f"need 1 <= n1 <= n2, got ({n1}, {n2})")
    q = n2 / n1
    lo = (1.0 + 1.0 / q - 2.0 / math.sqrt(q)) / n1
    hi = (1.0 + 1.0 / q + 2.0 / math.sqrt(q)) / n1
    return lo, hi


def mp_density(lam, n1: int, n2: int) -> np.ndarray:
    """Limiting eigenvalue density of a typical reduced density matrix.

    f(lam) = (n1 Q / 2 pi) sqrt((lam - lo)(hi - lam)) / lam on [lo, hi],
    zero outside; Q = n2/n1.  Integrates to 1 over the support.
    """
    lam = np.asarray(lam, dtype=np.float64)
    lo, hi = mp_support(n1, n2)
    q = n2 / n1
    out = np.zeros_like(lam)
    inside = (lam > lo) & (lam < hi) & (lam > 0)
    x = lam[inside]
    out[inside] = (n1 * q / (2.0 * math.pi)) * np.sqrt((x - lo) * (hi - x)) / x
    return out


def mp_cdf(lam, n1: int, n2: int, resolution: int = 4001) -> np.ndarray:
    """CDF of ``mp_density`` by quadrature on a square-root-adapted grid.

    The substitution lam = c + r sin(theta) absorbs the edge square
    roots, so the trapezoid rule converges fast.
    """
    lam = np.asarray(lam, dtype=np.float64)
    lo, hi = mp_support(n1, n2)
    c, r = (lo + hi) / 2.0, (hi - lo) / 2.0
    q = n2 / n1
    theta = np.linspace(-math.pi / 2.0, math.pi / 2.0, resolution)
    grid = c + r * np.sin(theta)
    # f(lam(theta)) * dlam/dtheta
    integrand = (n1 * q / (2.0 * math.pi)) * (r * np.cos(theta)) ** 2 / grid
    cdf_grid = np.concatenate(
        ([0.0], np.cumsum((integrand[1:] + integrand[:-1]) / 2.0 * np.diff(theta)))
    )
    cdf_grid /= cdf_grid[-1]
    return np.interp(lam, grid, cdf_grid, left=0.0, right=1.0)


def pool_spectra(
    densities: Iterable[ReducedDensity], window: tuple[int, int]
) -> SpectralPool:
    """Pool eigenvalues of densities whose time lies in [window0, window1]."""
    t_lo, t_hi = window
    values = []
    dim = None
    count = 0
    for rho in densities:
        if not t_lo <= rho.t <= t_hi:
            continue
        if dim is None:
            dim = rho.dim
        elif rho.dim != dim:
            raise ValueError("pooled densities must share a dimension")
        values.append(density_spectrum(rho))
        count += 1
    if not values:
        raise ValueError("no densities fall inside the window")
    pooled = np.sort(np.concatenate(values))
    return SpectralPool(eigenvalues=pooled, dim=dim, n_matrices=count, window=(t_lo, t_hi))


def ks_to_mp(pool: SpectralPool, n1: int, n2: int) -> float:
    """Kolmogorov-Smirnov distance of pooled eigenvalues to the reference law."""
    x = np.sort(np.asarray(pool.eigenvalues, dtype=np.float64))
    n = len(x)
    cdf = mp_cdf(x, n1, n2)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(upper - cdf), np.abs(cdf - lower))))


# ------------------------------------------------------------- distances


def distribution_distance(a: PositionDistribution, b: PositionDistribution, metric: str = "tv") -> float:
    """Total-variation or Kolmogorov-Smirnov distance between site profiles."""
    if a.n_sites != b.n_sites:
        raise ValueError(f"size mismatch: {a.n_sites} vs {b.n_sites}")
    if metric == "tv":
        return float(0.5 * np.abs(a.probs - b.probs).sum())
    if metric == "ks":
        _, pa = a.centered()
        _, pb = b.centered()
        return float(np.max(np.abs(np.cumsum(pa) - np.cumsum(pb))))
    raise ValueError(f"metric must be 'tv' or 'ks', got {metric!r}")
