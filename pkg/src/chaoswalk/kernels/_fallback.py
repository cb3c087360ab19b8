"""Pure-Python/NumPy kernels, used when the compiled extension is absent.

The classical-map loops are written operation-for-operation like the
Cython versions (same libm calls, same evaluation order) so both backends
produce bitwise identical orbits; chaotic orbits amplify any 1-ulp
difference exponentially, so nothing weaker would hold.  The unitary
evolution kernel only promises 1e-12 agreement: norm-preserving maps do
not amplify rounding noise, so the summation order may differ.
"""

from __future__ import annotations

import math

import numpy as np

_TWO_PI = 2.0 * math.pi


def evolve_sector_vectors(blocks: np.ndarray, vectors: np.ndarray, steps: int) -> np.ndarray:
    """Apply each sector's block unitary ``steps`` times to its vector.

    ``blocks`` has shape (n, m, m), ``vectors`` (n, m).  Returns a new
    (n, m) array; the input is not modified.  Matrix powers are never
    formed: this is repeated matrix-vector application.
    """
    out = np.array(vectors, dtype=np.complex128, copy=True)
    for _ in range(steps):
        out = np.matmul(blocks, out[:, :, None])[:, :, 0]
    return out


def harper_orbit(q0: float, p0: float, g: float, tau: float, n_steps: int) -> np.ndarray:
    """Iterate the kicked-rotor-on-a-torus map from (q0, p0).

    Returns an (n_steps + 1, 2) array of (q, p) rows including the initial
    point, all coordinates reduced to [0, 1).
    """
    out = np.empty((n_steps + 1, 2), dtype=np.float64)
    q = q0 - math.floor(q0)
    p = p0 - math.floor(p0)
    out[0, 0] = q
    out[0, 1] = p
    for i in range(1, n_steps + 1):
        q = q - tau * math.sin(_TWO_PI * p)
        q = q - math.floor(q)
        p = p + tau * g * math.sin(_TWO_PI * q)
        p = p - math.floor(p)
        out[i, 0] = q
        out[i, 1] = p
    return out


def harper_log_stretch(q0: float, p0: float, g: float, tau: float, n_steps: int) -> np.ndarray:
    """Per-step log growth factors of a tangent vector along an orbit.

    The tangent vector is renormalized every step; the summed logs divided by
    the step count estimate the largest Lyapunov exponent.  Returns an
    (n_steps,) array of log norms.
    """
    out = np.empty(n_steps, dtype=np.float64)
    q = q0 - math.floor(q0)
    p = p0 - math.floor(p0)
    v1 = math.sqrt(0.5)
    v2 = math.sqrt(0.5)
    for i in range(n_steps):
        a = -_TWO_PI * tau * math.cos(_TWO_PI * p)
        q = q - tau * math.sin(_TWO_PI * p)
        q = q - math.floor(q)
        c = _TWO_PI * tau * g * math.cos(_TWO_PI * q)
        p = p + tau * g * math.sin(_TWO_PI * q)
        p = p - math.floor(p)
        w1 = v1 + a * v2
        w2 = c * w1 + v2
        r = math.sqrt(w1 * w1 + w2 * w2)
        out[i] = math.log(r)
        v1 = w1 / r
        v2 = w2 / r
    return out
