"""Dense reference evaluation of the matrix functions whose decay is bounded."""
from __future__ import annotations

import enum
import math

import numpy as np
import scipy.linalg

from .matrices import ConvergenceError, solve_linear


class MatrixFunctionKind(enum.Enum):
    EXP = "exp"
    NEG_EXP = "negexp"
    INV_SQRT = "invsqrt"
    EXP_NEG_SQRT = "expnegsqrt"
    PHI1 = "phi1"

    def scalar(self):
        """Vectorized scalar counterpart (principal square root)."""
        return _SCALAR[self]


def _phi1_scalar(z):
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-8
    safe = np.where(small, 1.0, z)
    return np.where(small, 1 - z / 2 + z * z / 6, -np.expm1(-safe) / safe)


_SCALAR = {
    MatrixFunctionKind.EXP: np.exp,
    MatrixFunctionKind.NEG_EXP: lambda z: np.exp(-np.asarray(z, dtype=complex)),
    MatrixFunctionKind.INV_SQRT: lambda z: 1 / np.sqrt(np.asarray(z, dtype=complex)),
    MatrixFunctionKind.EXP_NEG_SQRT: lambda z: np.exp(-np.sqrt(np.asarray(z, dtype=complex))),
    MatrixFunctionKind.PHI1: _phi1_scalar,
}


def expm(A: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with the degree-13 Pade
    approximant (scipy's implementation)."""
    A = np.asarray(A, dtype=complex)
    with np.errstate(over="raise", invalid="raise"):
        try:
            E = scipy.linalg.expm(A)
        except FloatingPointError as exc:
            raise OverflowError("matrix exponential overflowed") from exc
    if not np.all(np.isfinite(E)):
        raise OverflowError("matrix exponential overflowed")
    return E


def sqrtm_pair(A: np.ndarray, tol: float = 1e-13, maxiter: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Principal A^{1/2} and A^{-1/2} by the Denman-Beavers iteration

        Y <- (mu Y + (mu Z)^{-1}) / 2,   Z <- (mu Z + (mu Y)^{-1}) / 2,

    with determinantal scaling mu = |det Y det Z|^{-1/(2n)} while far from
    convergence. Y -> A^{1/2}, Z -> A^{-1/2}.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    Y = A.copy()
    Z = np.eye(n, dtype=complex)
    scaling = True
    last = math.inf
    for _ in range(maxiter):
        if scaling:
            ly = np.linalg.slogdet(Y)[1]
            lz = np.linalg.slogdet(Z)[1]
            mu = math.exp(-(ly + lz) / (2 * n))
        else:
            mu = 1.0
        Yi = np.linalg.inv(Y)
        Zi = np.linalg.inv(Z)
        Y_new = (mu * Y + Zi / mu) / 2
        Z_new = (mu * Z + Yi / mu) / 2
        if not (np.all(np.isfinite(Y_new)) and np.all(np.isfinite(Z_new))):
            raise ConvergenceError("square root iteration diverged")
        change = np.linalg.norm(Y_new - Y, 1) / np.linalg.norm(Y_new, 1)
        Y, Z = Y_new, Z_new
        if change < 1e-2:
            scaling = False
        if change <= tol:
            return Y, Z
        # stagnation at the rounding level counts as converged
        if change < 1e-10 and change >= last:
            return Y, Z
        last = change
    raise ConvergenceError("square root iteration did not converge")


def eval_matfun(kind: MatrixFunctionKind | str, A: np.ndarray) -> np.ndarray:
    kind = MatrixFunctionKind(kind)
    A = np.asarray(A, dtype=complex)
    if kind is MatrixFunctionKind.EXP:
        return expm(A)
    if kind is MatrixFunctionKind.NEG_EXP:
        return expm(-A)
    if kind is MatrixFunctionKind.INV_SQRT:
        return sqrtm_pair(A)[1]
    if kind is MatrixFunctionKind.EXP_NEG_SQRT:
        return expm(-sqrtm_pair(A)[0])
    n = A.shape[0]
    return solve_linear(A, np.eye(n) - expm(-A))


def column_magnitudes(F: np.ndarray, t: int) -> list[tuple[int, float]]:
    """(row, |F[row, t]|) for rows 1..n; ``t`` is 1-based."""
    F = np.asarray(F)
    if not 1 <= t <= F.shape[1]:
        raise IndexError("column out of range")
    col = np.abs(F[:, t - 1])
    return [(i + 1, float(v)) for i, v in enumerate(col)]
