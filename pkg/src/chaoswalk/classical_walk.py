"""Classical unbiased walker on the same ring, exact and sampled.

The exact route recurses Pascal-style on integer path counts (the t-step
distribution is dyadic rational: counts over 2**t), so it is free of
rounding until the final division.  The Monte Carlo route samples final
displacements directly.
"""

from __future__ import annotations

import numpy as np

from .walk import PositionDistribution


def exact_counts(n_sites: int, t: int, initial_site: int = 0) -> list[int]:
    """Integer path counts per site after t unbiased steps (sums to 2**t)."""
    if n_sites < 2:
        raise ValueError(f"need at least 2 sites, got {n_sites}")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    counts = [0] * n_sites
    counts[initial_site % n_sites] = 1
    for _ in range(t):
        nxt = [0] * n_sites
        for n, c in enumerate(counts):
            if c:
                nxt[(n + 1) % n_sites] += c
                nxt[(n - 1) % n_sites] += c
        counts = nxt
    return counts


def exact_evolve(n_sites: int, t: int, initial_site: int = 0) -> PositionDistribution:
    """Exact ring distribution of the classical walk at time t."""
    counts = exact_counts(n_sites, t, initial_site)
    scale = 2**t
    probs = np.array([c / scale for c in counts], dtype=np.float64)
    return PositionDistribution(t=t, probs=probs)


def mc_evolve(
    n_sites: int, t: int, n_walkers: int, seed: int, initial_site: int = 0
) -> PositionDistribution:
    """Monte Carlo estimate of the same distribution by direct sampling.

    Each walker's net displacement is 2 B - t with B binomial(t, 1/2);
    sampling displacements directly is distribution-identical to
    stepping.  Converges to ``exact_evolve`` in total variation like
    1/sqrt(n_walkers).
    """
    if n_walkers < 1:
        raise ValueError(f"need at least one walker, got {n_walkers}")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    rights = rng.binomial(t, 0.5, size=n_walkers)
    sites = (initial_site + 2 * rights - t) % n_sites
    probs = np.bincount(sites, minlength=n_sites) / float(n_walkers)
    return PositionDistribution(t=t, probs=probs)
