"""Dense complex matrix kernels: banded/Toeplitz constructors, Kronecker sums,
pivoted solves, Hermitian extreme eigenpairs and the spectral norm.

Matrices are plain ``numpy`` arrays (complex128). Bandwidths travel as
metadata on :class:`BandedMatrix`, or are measured from the nonzero pattern.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

PIVOT_THRESHOLD = 1e-14


class SingularMatrixError(np.linalg.LinAlgError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ToeplitzSpec:
    """Stencil listed from the farthest sub-diagonal to the farthest
    super-diagonal, ``stencil[diag_index]`` being the main diagonal."""

    stencil: tuple
    diag_index: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "stencil", tuple(complex(s) for s in self.stencil))
        if not self.stencil:
            raise ValueError("empty Toeplitz stencil")
        if not 0 <= self.diag_index < len(self.stencil):
            raise ValueError(
                f"diag_index {self.diag_index} out of range for stencil of length {len(self.stencil)}"
            )
        if self.n < len(self.stencil):
            raise ValueError("matrix order must be at least the stencil length")

    @property
    def beta(self) -> int:
        return len(self.stencil) - 1 - self.diag_index

    @property
    def gamma(self) -> int:
        return self.diag_index


@dataclass(frozen=True, eq=False)
class BandedMatrix:
    data: np.ndarray
    beta: int
    gamma: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError("banded matrix must be square")
        if self.beta < 0 or self.gamma < 0:
            raise ValueError("bandwidths must be nonnegative")
        offsets = np.subtract.outer(np.arange(data.shape[0]), np.arange(data.shape[0]))
        outside = (-offsets > self.beta) | (offsets > self.gamma)
        if np.any(data[outside] != 0):
            raise ValueError("nonzero entries outside the declared band")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def band_distance(self, k: int, l: int) -> int:
        return band_distance(k, l, self.beta, self.gamma)


def toeplitz_build(spec: ToeplitzSpec) -> BandedMatrix:
    n = spec.n
    A = np.zeros((n, n), dtype=complex)
    for pos, value in enumerate(spec.stencil):
        offset = pos - spec.diag_index  # column minus row
        if value != 0:
            A += value * np.eye(n, k=offset)
    return BandedMatrix(A, spec.beta, spec.gamma)


def toeplitz(stencil: Sequence, diag_index: int, n: int) -> BandedMatrix:
    return toeplitz_build(ToeplitzSpec(tuple(stencil), diag_index, n))


def measured_bandwidths(A: np.ndarray) -> tuple[int, int]:
    """Return (upper, lower) bandwidths actually occupied by nonzeros."""
    rows, cols = np.nonzero(A)
    if rows.size == 0:
        return 0, 0
    diff = cols - rows
    return int(max(diff.max(), 0)), int(max(-diff.min(), 0))


def band_distance(k: int, l: int, beta: int, gamma: int) -> int:
    """Smallest power of a (beta, gamma)-banded matrix whose (k, l) entry may be
    nonzero. Indices are 1-based."""
    if k == l:
        raise ValueError("band distance is undefined on the diagonal")
    if beta < 1 or gamma < 1:
        raise ValueError("bandwidths must be at least 1")
    if k < l:
        return -(-(l - k) // beta)
    return -(-(k - l) // gamma)


def kron_sum(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """A (+) B = A kron I + I kron B."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("Kronecker sum needs square matrices")
    return np.kron(A, np.eye(B.shape[0])) + np.kron(np.eye(A.shape[0]), B)


def solve_linear(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve AX = B by LU with partial (row) pivoting.

    Raises SingularMatrixError when a pivot falls below
    ``PIVOT_THRESHOLD * max|A|``.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("coefficient matrix must be square")
    scale = np.max(np.abs(A)) if A.size else 0.0
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularMatrixError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    if scale == 0.0 or np.min(np.abs(np.diag(lu))) <= PIVOT_THRESHOLD * scale:
        raise SingularMatrixError("matrix is singular to working precision")
    return scipy.linalg.lu_solve((lu, piv), B)


def _is_hermitian(H: np.ndarray) -> bool:
    nrm = np.linalg.norm(H)
    return np.linalg.norm(H - H.conj().T) <= 1e-12 * max(nrm, np.finfo(float).tiny)


def hermitian_extreme_eigenpair(H: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue of a Hermitian matrix and a unit eigenvector."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("matrix must be square")
    if not _is_hermitian(H):
        raise ValueError("matrix is not Hermitian")
    H = (H + H.conj().T) / 2
    n = H.shape[0]
    w, U = scipy.linalg.eigh(H, subset_by_index=[n - 1, n - 1])
    lam, u = float(w[0]), U[:, 0]
    u = u / np.linalg.norm(u)
    hnorm = max(abs(w[0]), np.linalg.norm(H, 1))
    if np.linalg.norm(H @ u - lam * u) > 1e-10 * max(hnorm, 1e-300):
        raise ConvergenceError("extreme eigenpair did not reach the residual target")
    return lam, u


def spectral_norm(A: np.ndarray) -> float:
    """2-norm as the square root of the top eigenvalue of A*A."""
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0.0
    G = A.conj().T @ A
    lam, _ = hermitian_extreme_eigenpair((G + G.conj().T) / 2)
    return math.sqrt(max(lam, 0.0))
