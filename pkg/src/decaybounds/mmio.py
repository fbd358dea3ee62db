"""Matrix Market (.mtx) input/output for dense complex matrices."""
from __future__ import annotations

import os

import numpy as np
import scipy.io
import scipy.sparse

SUPPORTED_FIELDS = {"real", "complex", "integer"}
SUPPORTED_SYMMETRY = {"general", "symmetric", "hermitian"}


class MatrixMarketError(ValueError):
    pass


def mtx_read(path: str | os.PathLike) -> np.ndarray:
    """Read a coordinate or array Matrix Market file into a dense matrix.

    Symmetric/Hermitian storage is mirrored. Pattern and skew-symmetric
    files are rejected.
    """
    try:
        rows, cols, entries, fmt, field, symmetry = scipy.io.mminfo(path)
    except (ValueError, IndexError) as exc:
        raise MatrixMarketError(f"{path}: malformed header ({exc})") from exc
    if field not in SUPPORTED_FIELDS:
        raise MatrixMarketError(f"{path}: unsupported field '{field}'")
    if symmetry not in SUPPORTED_SYMMETRY:
        raise MatrixMarketError(f"{path}: unsupported symmetry '{symmetry}'")
    try:
        M = scipy.io.mmread(path)
    except ValueError as exc:
        raise MatrixMarketError(f"{path}: {exc}") from exc
    dense = M.toarray() if hasattr(M, "toarray") else np.asarray(M)
    if dense.shape != (rows, cols):
        raise MatrixMarketError(f"{path}: shape {dense.shape} does not match header {(rows, cols)}")
    return dense.astype(complex)


def mtx_write(path: str | os.PathLike, A: np.ndarray, fmt: str = "array") -> None:
    """Write a dense matrix; values carry 17 significant digits."""
    A = np.asarray(A)
    if np.iscomplexobj(A) and not np.any(A.imag):
        A = A.real
    if fmt == "array":
        scipy.io.mmwrite(path, A, precision=17)
    elif fmt == "coordinate":
        scipy.io.mmwrite(path, scipy.sparse.coo_matrix(A), precision=17)
    else:
        raise ValueError(f"unknown Matrix Market format '{fmt}'")
