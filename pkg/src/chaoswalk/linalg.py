"""Dense complex linear algebra with contract checks, plus CMX1 file I/O.

All state in this package is complex128 and row-major.  The helpers here
wrap NumPy/LAPACK but enforce the package-wide contracts: shape checks on
every product, finiteness of results, hermiticity before an eigensolve.

The CMX1 container is a single ASCII header line ``CMX1 <rows> <cols>``
followed by rows*cols little-endian float64 (re, im) pairs in row-major
order.  complex128 arrays have exactly that memory layout, so round trips
are bit-exact.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

# Sign of the exponent taking momentum-basis amplitudes to position-basis
# amplitudes: <n|k> = exp(-2i pi k n / N) / sqrt(N).  The opposite sign
# inverts the transform.  Everything downstream (walker densities,
# position distributions) derives its orientation from this constant.
MOMENTUM_TO_POSITION = -1

_CMX1_MAGIC = b"CMX1"


class DimensionMismatchError(ValueError):
    """Operand shapes are incompatible for the requested product."""


class NotHermitianError(ValueError):
    """Matrix fails the hermiticity tolerance of an eigensolve."""


class NonFiniteError(FloatingPointError):
    """A kernel operation produced NaN or Inf entries."""


class MalformedHeaderError(ValueError):
    """A CMX1 file does not start with a valid header line."""


class HermitianEigen(NamedTuple):
    """Eigendecomposition of a Hermitian matrix.

    ``values`` are real and ascending; ``vectors[:, i]`` is the
    orthonormal eigenvector for ``values[i]``.
    """

    values: np.ndarray
    vectors: np.ndarray


def _as_complex_matrix(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-d array, got shape {a.shape}")
    return a


def require_finite(a: np.ndarray, what: str = "result") -> np.ndarray:
    if not np.all(np.isfinite(a.view(np.float64))):
        raise NonFiniteError(f"{what} contains NaN or Inf entries")
    return a


def matvec(a, x) -> np.ndarray:
    """Matrix-vector product with shape and finiteness checks."""
    a = _as_complex_matrix(a)
    x = np.ascontiguousarray(x, dtype=np.complex128)
    if x.ndim != 1 or a.shape[1] != x.shape[0]:
        raise DimensionMismatchError(
            f"cannot apply {a.shape[0]}x{a.shape[1]} matrix to vector of length {x.shape}"
        )
    return require_finite(a @ x, "matvec product")


def matmul(a, b) -> np.ndarray:
    """Matrix-matrix product with shape and finiteness checks."""
    a = _as_complex_matrix(a)
    b = _as_complex_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatchError(
            f"cannot multiply shapes {a.shape} and {b.shape}"
        )
    return require_finite(a @ b, "matmul product")


def eigh(a, herm_tol: float = 1e-8) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    a : array_like
        Square matrix with ``max |a - a^dag| <= herm_tol``.
    herm_tol : float
        Hermiticity tolerance; violations raise ``NotHermitianError``.

    Returns
    -------
    HermitianEigen
        Ascending real eigenvalues and orthonormal column eigenvectors of
        the symmetrized matrix ``(a + a^dag) / 2``.
    """
    a = _as_complex_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"eigh needs a square matrix, got {a.shape}")
    require_finite(a, "eigh input")
    defect = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if defect > herm_tol:
        raise NotHermitianError(
            f"matrix is not Hermitian: max |a - a^dag| = {defect:.3e} > {herm_tol:.1e}"
        )
    sym = (a + a.conj().T) / 2.0
    values, vectors = np.linalg.eigh(sym)
    require_finite(vectors, "eigh eigenvectors")
    return HermitianEigen(values=values, vectors=vectors)


def dft(x, sign: int) -> np.ndarray:
    """Unitary discrete Fourier transform of a vector.

    ``y[n] = d**-0.5 * sum_k x[k] exp(sign * 2i pi k n / d)`` where
    ``d = len(x)``.  ``sign`` must be +1 or -1; ``MOMENTUM_TO_POSITION``
    gives the orientation used for walker bases.
    """
    x = np.ascontiguousarray(x, dtype=np.complex128)
    if x.ndim != 1:
        raise DimensionMismatchError(f"dft expects a vector, got shape {x.shape}")
    if sign == -1:
        y = np.fft.fft(x, norm="ortho")
    elif sign == 1:
        y = np.fft.ifft(x, norm="ortho")
    else:
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return require_finite(y, "dft result")


def dft_matrix(dim: int, sign: int) -> np.ndarray:
    """Dense unitary DFT matrix, ``F[n, k] = exp(sign*2i pi k n/dim)/sqrt(dim)``."""
    if dim <= 0:
        raise ValueError(f"dim must be positive, got {dim}")
    if sign not in (-1, 1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    n = np.arange(dim)
    return np.exp(sign * 2j * np.pi * np.outer(n, n) / dim) / np.sqrt(dim)


def save_cmatrix(path, a) -> None:
    """Write a complex matrix in CMX1 form (bit-exact round trip)."""
    a = _as_complex_matrix(a)
    require_finite(a, "matrix to save")
    with open(path, "wb") as fh:
        fh.write(b"%s %d %d\n" % (_CMX1_MAGIC, a.shape[0], a.shape[1]))
        fh.write(a.astype("<c16", copy=False).tobytes(order="C"))


def load_cmatrix(path) -> np.ndarray:
    """Read a CMX1 file back into a complex128 matrix."""
    with open(path, "rb") as fh:
        header = fh.readline(128)
        payload = fh.read()
    parts = header.split()
    if len(parts) != 3 or parts[0] != _CMX1_MAGIC or not header.endswith(b"\n"):
        raise MalformedHeaderError(f"bad CMX1 header: {header!r}")
    try:
        rows, cols = int(parts[1]), int(parts[2])
    except ValueError as exc:
        raise MalformedHeaderError(f"bad CMX1 dimensions: {header!r}") from exc
    if rows < 0 or cols < 0:
        raise MalformedHeaderError(f"negative CMX1 dimensions: {header!r}")
    expected = rows * cols * 16
    if len(payload) != expected:
        raise MalformedHeaderError(
            f"CMX1 payload is {len(payload)} bytes, header promises {expected}"
        )
    a = np.frombuffer(payload, dtype="<c16").astype(np.complex128).reshape(rows, cols)
    return require_finite(a, "loaded matrix")
