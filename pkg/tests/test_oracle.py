import math

import numpy as np
import pytest

from decaybounds.matrices import ConvergenceError, kron_sum, toeplitz
from decaybounds.oracle import (MatrixFunctionKind, column_magnitudes, eval_matfun, expm, sqrtm_pair)


def test_expm_examples(rng):
    assert np.allclose(expm(np.zeros((3, 3))), np.eye(3), atol=0)
    assert np.allclose(expm(np.diag([1.0, 2.0])), np.diag([math.e, math.e**2]), rtol=1e-13, atol=0)
    A = rng.standard_normal((4, 4))
    B = rng.standard_normal((4, 4))
    lhs = expm(kron_sum(A, B))
    assert np.linalg.norm(lhs - np.kron(expm(A), expm(B))) <= 1e-10 * np.linalg.norm(lhs)


def test_expm_inverse_pair(rng):
    A = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    A *= 10 / np.linalg.norm(A, 2)
    assert np.linalg.norm(expm(-A) @ expm(A) - np.eye(8)) <= 1e-9


def test_expm_overflow_is_reported():
    with pytest.raises(OverflowError):
        expm(np.diag([1000.0, 0.0]))


def test_sqrtm_examples(rng):
    S, Z = sqrtm_pair(4 * np.eye(3))
    assert np.allclose(S, 2 * np.eye(3)) and np.allclose(Z, 0.5 * np.eye(3))
    S, _ = sqrtm_pair(np.diag([1.0, 9.0]))
    assert np.allclose(S, np.diag([1, 3]))
    A = 5 * np.eye(12) + 0.1 * rng.standard_normal((12, 12))
    S, Z = sqrtm_pair(A)
    assert np.linalg.norm(S @ S - A) <= 1e-10 * np.linalg.norm(A)
    assert np.linalg.norm(S @ Z - np.eye(12)) <= 1e-10
    assert np.linalg.norm(Z @ S - np.eye(12)) <= 1e-10


def test_sqrtm_principal_branch_on_normal_input(rng):
    ev = np.array([1 + 2j, 3 - 1j, 0.5 + 0.1j, 2j + 0.01])
    X = rng.standard_normal((4, 4))
    A = X @ np.diag(ev) @ np.linalg.inv(X)
    S, _ = sqrtm_pair(A)
    roots = np.linalg.eigvals(S)
    assert np.all(np.abs(np.angle(roots)) < math.pi / 2)
    assert np.allclose(np.sort_complex(roots), np.sort_complex(np.sqrt(ev)), atol=1e-9)


def test_sqrtm_on_negative_spectrum_fails():
    with pytest.raises(ConvergenceError):
        sqrtm_pair(np.diag([-1.0, -4.0]), maxiter=30)


def test_eval_matfun_examples():
    assert np.allclose(eval_matfun("phi1", np.eye(2)), (1 - math.exp(-1)) * np.eye(2), rtol=1e-13)
    assert np.allclose(eval_matfun(MatrixFunctionKind.EXP_NEG_SQRT, 4 * np.eye(2)), math.exp(-2) * np.eye(2))
    assert np.allclose(eval_matfun("negexp", np.diag([1.0, 2.0])), np.diag(np.exp([-1.0, -2.0])))
    assert np.allclose(eval_matfun("invsqrt", np.diag([4.0, 9.0])), np.diag([0.5, 1 / 3]))


def test_functions_commute_with_argument(rng):
    A = 6 * np.eye(10) + 0.5 * rng.standard_normal((10, 10))  # W(A) in the right half-plane
    for kind in MatrixFunctionKind:
        F = eval_matfun(kind, A)
        assert np.linalg.norm(F @ A - A @ F) <= 1e-10 * np.linalg.norm(F) * np.linalg.norm(A)


def test_scalar_counterparts_match_diagonal_evaluation():
    d = np.array([0.5 + 0.2j, 2.0, 3 - 1j])
    for kind in MatrixFunctionKind:
        F = eval_matfun(kind, np.diag(d))
        assert np.allclose(np.diag(F), kind.scalar()(d), rtol=1e-12)
    assert MatrixFunctionKind.PHI1.scalar()(1e-10) == pytest.approx(1 - 5e-11)


def test_column_magnitudes_examples():
    assert column_magnitudes(np.eye(3), 1) == [(1, 1.0), (2, 0.0), (3, 0.0)]
    mags = column_magnitudes(np.diag([1.0, -2.0, 3.0]), 2)
    assert [v for _, v in mags] == [0.0, 2.0, 0.0]
    with pytest.raises(IndexError):
        column_magnitudes(np.eye(3), 4)


def test_fig1a_column_peaks_near_diagonal():
    F = eval_matfun("exp", toeplitz([-1j, 1j, -2], 1, 200).data)
    mags = column_magnitudes(F, 127)
    assert len(mags) == 200
    peak = max(mags, key=lambda rv: rv[1])[0]
    assert abs(peak - 127) <= 3
