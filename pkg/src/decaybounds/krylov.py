"""Exact and inexact Arnoldi approximation of f(A)v with residual monitoring
and decay-driven relaxation of the matrix-vector product accuracy."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .bounds import CROUZEIX, expsqrt_bound, exp_bound
from .oracle import MatrixFunctionKind, eval_matfun
from .regions import EllipseRegion, inflate_for_perturbation

BREAKDOWN_TOL = 1e-14


class MatVecOracle(Protocol):
    def apply(self, v: np.ndarray, tolerance: float) -> np.ndarray:
        """Return A v + w with ||w|| <= tolerance."""


class ExactOperator:
    def __init__(self, A: np.ndarray):
        self.A = np.asarray(A)

    def apply(self, v, tolerance=0.0):
        return self.A @ v


class PerturbedOperator:
    """A v + w where w is a random complex direction scaled to norm
    ``tolerance``. Every injected w is recorded in ``perturbations``."""

    def __init__(self, A: np.ndarray, seed: int | None = 0):
        self.A = np.asarray(A)
        self.rng = np.random.default_rng(seed)
        self.perturbations: list[np.ndarray] = []

    def apply(self, v, tolerance=0.0):
        n = self.A.shape[0]
        w = self.rng.standard_normal(n) + 1j * self.rng.standard_normal(n)
        w *= tolerance / np.linalg.norm(w)
        self.perturbations.append(w)
        return self.A @ v + w


@dataclass
class ArnoldiDecomposition:
    """``V`` holds m+1 columns, ``H_ext`` is the (m+1) x m Hessenberg matrix."""

    V: np.ndarray
    H_ext: np.ndarray
    m: int
    breakdown: bool
    vnorm: float
    tolerances: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def H(self) -> np.ndarray:
        return self.H_ext[: self.m, : self.m]

    @property
    def h_next(self) -> float:
        return float(abs(self.H_ext[self.m, self.m - 1])) if self.m else 0.0

    @property
    def Vm(self) -> np.ndarray:
        return self.V[:, : self.m]

    def truncated(self, j: int) -> "ArnoldiDecomposition":
        """The decomposition after step j (1 <= j <= m)."""
        if not 1 <= j <= self.m:
            raise ValueError("step out of range")
        broke = self.breakdown and j == self.m
        return ArnoldiDecomposition(self.V[:, : j + 1], self.H_ext[: j + 1, :j], j, broke,
                                    self.vnorm, self.tolerances[:j])


def arnoldi(op: MatVecOracle, v: np.ndarray, m: int,
            tolerances: Sequence[float] | None = None) -> ArnoldiDecomposition:
    """m Arnoldi steps with modified Gram-Schmidt plus one reorthogonalization
    pass. Step k calls ``op.apply(v_k, tolerances[k-1])``."""
    v = np.asarray(v, dtype=complex)
    vnorm = float(np.linalg.norm(v))
    if vnorm == 0:
        raise ValueError("start vector is zero")
    tol = np.zeros(m) if tolerances is None else np.asarray(tolerances, dtype=float)
    if len(tol) != m:
        raise ValueError("need one tolerance per step")
    n = v.shape[0]
    V = np.zeros((n, m + 1), dtype=complex)
    H = np.zeros((m + 1, m), dtype=complex)
    V[:, 0] = v / vnorm
    for k in range(m):
        w = np.asarray(op.apply(V[:, k], float(tol[k])), dtype=complex)
        for _ in range(2):
            for i in range(k + 1):
                c = np.vdot(V[:, i], w)
                H[i, k] += c
                w = w - c * V[:, i]
        h = np.linalg.norm(w)
        H[k + 1, k] = h
        if h <= BREAKDOWN_TOL * max(np.linalg.norm(H[: k + 2, : k + 1]), 1e-300):
            H[k + 1, k] = 0.0
            return ArnoldiDecomposition(V[:, : k + 2], H[: k + 2, : k + 1], k + 1, True, vnorm,
                                        tol[: k + 1])
        V[:, k + 1] = w / h
    return ArnoldiDecomposition(V, H, m, False, vnorm, tol)


def _fH(dec: ArnoldiDecomposition, kind) -> np.ndarray:
    return eval_matfun(kind, dec.H)


def krylov_approx(dec: ArnoldiDecomposition, kind, vnorm: float | None = None) -> np.ndarray:
    """y_m = ||v|| V_m f(H_m) e_1."""
    vnorm = dec.vnorm if vnorm is None else vnorm
    return vnorm * dec.Vm @ _fH(dec, kind)[:, 0]


def residual_rm(dec: ArnoldiDecomposition, kind) -> float:
    """r_m = h_{m+1,m} |e_m^T f(H_m) e_1| (times ||v||)."""
    if dec.m < 1:
        raise ValueError("need at least one step")
    if dec.h_next == 0:
        return 0.0
    return dec.vnorm * dec.h_next * float(abs(_fH(dec, kind)[dec.m - 1, 0]))


def true_residual(A: np.ndarray, dec: ArnoldiDecomposition, kind) -> float:
    """||A y_m - ||v|| V_m H_m f(H_m) e_1||, the differential-equation residual
    evaluated with the exact matrix."""
    g = _fH(dec, kind)[:, 0]
    Vm = dec.Vm
    return dec.vnorm * float(np.linalg.norm(A @ (Vm @ g) - Vm @ (dec.H @ g)))


def apriori_residual_bound(E: EllipseRegion, h_bound: float, m: int) -> float:
    """Bound on r_m for f(z) = e^{-z} with W(A) inside E; inf for m <= b + 1."""
    a, b, c1 = E.a, E.b, E.c1
    if m <= b + 1:
        return math.inf
    x = m - 1
    d = a * a - b * b
    s = math.sqrt(x * x + d)
    q = 1 + d / (x * x + x * s)
    p = (x + s) / (x + s - (a + b))
    lv = math.log(2) - c1 + math.log(p) + x * (q + math.log(a + b) - math.log(x + s))
    if h_bound == 0:
        return 0.0
    return h_bound * math.exp(lv) if lv > -745 else 0.0


@dataclass
class InexactSchedule:
    tol: float
    eps_m: float
    m: int
    s: np.ndarray
    eps_bar: np.ndarray

    @property
    def budget_used(self) -> float:
        return float(math.sqrt(np.sum(self.eps_bar**2)))


def relaxation_schedule(tol: float, eps_m: float, m: int, s: Sequence[float]) -> InexactSchedule:
    """Per-step matvec tolerances.

    eps_j = (tol/m) max(1, 1/s_j) while that stays below the even share
    sqrt(eps_m^2 - sum_{k<j} eps_k^2) / (m - j + 1) of the remaining budget,
    otherwise the share itself. sqrt(sum eps_j^2) <= eps_m by construction.
    """
    s = np.asarray(s, dtype=float)
    if tol <= 0 or eps_m <= 0:
        raise ValueError("tol and eps_m must be positive")
    if len(s) != m or np.any(s <= 0):
        raise ValueError("need m positive decay weights")
    eps = np.zeros(m)
    used = 0.0
    shrink = 1 - 4 * np.finfo(float).eps
    for j in range(1, m + 1):
        share = math.sqrt(max(eps_m * eps_m - used, 0.0)) / (m - j + 1) * shrink
        relaxed = (tol / m) * max(1.0, 1.0 / s[j - 1])
        eps[j - 1] = relaxed if relaxed < share else share
        used += eps[j - 1] ** 2
    return InexactSchedule(tol, eps_m, m, s, eps)


def decay_weights(kind, E: EllipseRegion, m: int, eps_m: float) -> np.ndarray:
    """s_j bounding |e_j^T f(H_m) e_1| for j = 1..m from the ellipse inflated by
    eps_m. Steps where the corollary does not apply fall back to the Crouzeix
    norm bound."""
    kind = MatrixFunctionKind(kind)
    Em = inflate_for_perturbation(E, eps_m)
    if kind is MatrixFunctionKind.NEG_EXP:
        env = exp_bound(EllipseRegion(-Em.center, Em.a, Em.b))
        fallback = CROUZEIX * math.exp(-(Em.c1 - Em.a))
    elif kind is MatrixFunctionKind.EXP:
        env = exp_bound(Em)
        fallback = CROUZEIX * math.exp(Em.c1 + Em.a)
    elif kind is MatrixFunctionKind.EXP_NEG_SQRT:
        if Em.b > Em.a:
            # the square-root bounds need a horizontal ellipse; use the enclosing disk
            Em = EllipseRegion(Em.center, Em.b, Em.b)
        env = expsqrt_bound(Em)
        fallback = CROUZEIX
    else:
        raise ValueError(f"no decay weights for {kind}")
    return np.array([env(j - 1) if env.valid(j - 1) else fallback for j in range(1, m + 1)])


@dataclass
class InexactRun:
    decomposition: ArnoldiDecomposition
    schedule: np.ndarray
    residuals: np.ndarray  # r_j from the computed Hessenberg matrices
    gap_bounds: np.ndarray  # sum_i ||w_i|| |e_i^T f(H_j) e_1|
    true_residuals: np.ndarray | None  # with the exact matrix, when available
    perturbation_norms: np.ndarray

    @property
    def gap_bound(self) -> float:
        return float(self.gap_bounds[-1])


def inexact_arnoldi_run(op: MatVecOracle, v: np.ndarray, kind, schedule,
                        A: np.ndarray | None = None) -> InexactRun:
    """Run Arnoldi with per-step tolerances and record r_j, the computable gap
    bound and, if the exact matrix is supplied, the true residual."""
    eps = schedule.eps_bar if isinstance(schedule, InexactSchedule) else np.asarray(schedule, float)
    dec = arnoldi(op, v, len(eps), eps)
    w_norms = np.asarray(eps[: dec.m], dtype=float)
    if isinstance(op, PerturbedOperator) and len(op.perturbations) >= dec.m:
        w_norms = np.array([np.linalg.norm(w) for w in op.perturbations[-dec.m:]])
    res, gaps, true = [], [], []
    for j in range(1, dec.m + 1):
        dj = dec.truncated(j)
        col = np.abs(_fH(dj, kind)[:, 0])
        res.append(dj.vnorm * dj.h_next * col[j - 1] if dj.h_next else 0.0)
        gaps.append(dj.vnorm * float(np.dot(w_norms[:j], col)))
        if A is not None:
            true.append(true_residual(A, dj, kind))
    return InexactRun(dec, np.asarray(eps), np.array(res), np.array(gaps),
                      np.array(true) if A is not None else None, w_norms)
