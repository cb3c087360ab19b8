"""Classical kicked Harper map on the unit torus.

The map advances (q, p) by one kick period:

    q' = q - tau * sin(2 pi p)      (mod 1)
    p' = p + tau * g * sin(2 pi q') (mod 1)

It is area preserving (unit Jacobian determinant) and invertible; the
kick uses the updated coordinate, which is what makes the inverse exact.
Phase portraits and tangent-space Lyapunov estimates back the choice of
coin parameters used on the quantum side.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import kernels
from .coins import HarperParams


class PhasePoint(NamedTuple):
    q: float
    p: float


def _wrapped(point: PhasePoint) -> PhasePoint:
    q, p = float(point[0]), float(point[1])
    if not (math.isfinite(q) and math.isfinite(p)):
        raise ValueError(f"phase point must be finite, got {point!r}")
    return PhasePoint(q - math.floor(q), p - math.floor(p))


def classical_step(point: PhasePoint, params: HarperParams) -> PhasePoint:
    """One forward iteration of the map."""
    start = _wrapped(point)
    # route through the orbit kernel so single steps match bulk orbits bitwise
    row = kernels.harper_orbit(start.q, start.p, params.g, params.tau, 1)[1]
    return PhasePoint(float(row[0]), float(row[1]))


def inverse_step(point: PhasePoint, params: HarperParams) -> PhasePoint:
    """One backward iteration; undoes ``classical_step`` to rounding."""
    q1, p1 = _wrapped(point)
    p0 = p1 - params.tau * params.g * math.sin(2.0 * math.pi * q1)
    p0 -= math.floor(p0)
    q0 = q1 + params.tau * math.sin(2.0 * math.pi * p0)
    q0 -= math.floor(q0)
    return PhasePoint(q0, p0)


def orbit(point: PhasePoint, params: HarperParams, n_steps: int) -> np.ndarray:
    """Forward orbit as an (n_steps + 1, 2) array including the start."""
    if n_steps < 0:
        raise ValueError(f"n_steps must be non-negative, got {n_steps}")
    start = _wrapped(point)
    return kernels.harper_orbit(start.q, start.p, params.g, params.tau, n_steps)


def phase_portrait(
    params: HarperParams,
    n_orbits: int = 100,
    n_steps: int = 1000,
    seed: int = 0,
) -> list[np.ndarray]:
    """Orbits from uniformly random initial conditions, one array each.

    Deterministic for a fixed seed.  Orbit ``i`` starts from the i-th
    (q, p) pair of the seeded uniform stream.
    """
    if n_orbits < 1:
        raise ValueError(f"need at least one orbit, got {n_orbits}")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    starts = rng.random((n_orbits, 2))
    return [orbit(PhasePoint(q0, p0), params, n_steps) for q0, p0 in starts]


def lyapunov_estimate(params: HarperParams, point: PhasePoint, n_steps: int = 100000) -> float:
    """Largest Lyapunov exponent along one orbit, nats per map step.

    Tangent-vector iteration with per-step renormalization; the first
    10% of the log growth factors are discarded as transient.
    """
    if n_steps < 1000:
        raise ValueError(f"need at least 1000 steps for a usable estimate, got {n_steps}")
    start = _wrapped(point)
    logs = kernels.harper_log_stretch(start.q, start.p, params.g, params.tau, n_steps)
    burn = n_steps // 10
    return float(np.mean(logs[burn:]))


def jacobian(point: PhasePoint, params: HarperParams) -> np.ndarray:
    """Tangent map of one forward step at ``point`` (before the step)."""
    q0, p0 = _wrapped(point)
    stepped = classical_step(PhasePoint(q0, p0), params)
    dqdp = -2.0 * math.pi * params.tau * math.cos(2.0 * math.pi * p0)
    dpdq1 = 2.0 * math.pi * params.tau * params.g * math.cos(2.0 * math.pi * stepped.q)
    return np.array(
        [[1.0, dqdp], [dpdq1, 1.0 + dpdq1 * dqdp]], dtype=np.float64
    )


def coverage_fraction(points: np.ndarray, bins: int = 50) -> float:
    """Fraction of torus grid cells visited by the given (q, p) rows."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    hist, _, _ = np.histogram2d(
        pts[:, 0], pts[:, 1], bins=bins, range=[[0.0, 1.0], [0.0, 1.0]]
    )
    return float(np.count_nonzero(hist)) / float(bins * bins)
