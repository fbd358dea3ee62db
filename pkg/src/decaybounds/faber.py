"""Conformal maps, Faber polynomials and the generic Faber decay bounds.

Both region types are handled through one parametrization of the exterior
map inverse,

    psi(z) = ((a + b) z + (a - b) / z) / 2 + c,

which is the Joukowski map of an axis-aligned ellipse (vertical when b > a)
and reduces to ``c + R z`` for a disk (a = b = R).  Working with a + b and
a - b keeps every formula real even when the focal distance is imaginary.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .regions import DiskRegion, EllipseRegion

DEFAULT_NQUAD = 2048
DEFAULT_TAU_MAX = 1e3
TAU_GRID_POINTS = 200
NODE_MAX_INFLATION = 1.001

Region = EllipseRegion | DiskRegion


def _axes(region: Region) -> tuple[complex, float, float]:
    if isinstance(region, DiskRegion):
        return region.center, region.radius, region.radius
    return region.center, region.a, region.b


@dataclass
class DecayEnvelope:
    """Certified upper bound xi -> |f(A)_{k,l}| valid for ``xi >= xi_min``.

    Calling the envelope below ``xi_min`` returns ``inf`` (no bound).
    """

    bound: Callable[[int], float]
    xi_min: float
    description: str
    params: dict = field(default_factory=dict)

    def valid(self, xi) -> bool:
        return xi >= self.xi_min

    def __call__(self, xi) -> float:
        if not self.valid(xi):
            return math.inf
        return float(self.bound(xi))

    def table(self, xis: Sequence[int]) -> list[tuple[int, float, bool]]:
        return [(int(x), self(x), self.valid(x)) for x in xis]


def psi(region: Region, z):
    """Inverse exterior map: |z| = 1 goes to the region boundary."""
    c, a, b = _axes(region)
    z = np.asarray(z, dtype=complex)
    if a == b:
        out = c + a * z
    else:
        if np.any(z == 0):
            raise ZeroDivisionError("psi is singular at z = 0 for a non-circular ellipse")
        out = ((a + b) * z + (a - b) / z) / 2 + c
    return out[()] if out.ndim == 0 else out


def phi(region: Region, w):
    """Exterior conformal map onto |z| > 1.

    Of the two roots of psi(z) = w the one of larger modulus is returned,
    which is the branch satisfying phi(w) ~ w/d at infinity.
    """
    c, a, b = _axes(region)
    if a + b == 0:
        raise ZeroDivisionError("phi is undefined for a point region")
    u = np.asarray(w, dtype=complex) - c
    if a == b:
        out = u / a
    else:
        root = np.sqrt(u * u - (a * a - b * b))
        plus = (u + root) / (a + b)
        minus = (u - root) / (a + b)
        out = np.where(np.abs(plus) >= np.abs(minus), plus, minus)
    return out[()] if out.ndim == 0 else out


@dataclass
class FaberCoefficients:
    region: Region
    tau: float
    coeffs: np.ndarray
    n_quad: int
    node_max: float

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, j):
        return self.coeffs[j]


def _evaluate_on_level(f, region: Region, tau: float, n_quad: int) -> np.ndarray:
    theta = 2 * np.pi * np.arange(n_quad) / n_quad
    w = psi(region, tau * np.exp(1j * theta))
    with warnings.catch_warnings(), np.errstate(all="ignore"):
        warnings.simplefilter("ignore", RuntimeWarning)
        try:
            vals = np.asarray(f(w), dtype=complex)
        except TypeError:
            vals = np.array([f(x) for x in w], dtype=complex)
    if vals.shape != w.shape:
        vals = np.broadcast_to(vals, w.shape).astype(complex)
    return vals


def faber_coefficients(f, region: Region, tau: float, n_quad: int = DEFAULT_NQUAD,
                       j_max: int | None = None) -> FaberCoefficients:
    """Faber coefficients f_j = (1/2 pi i) int_{|z|=tau} f(psi(z)) z^{-j-1} dz.

    The integral is the trapezoid rule on the circle, i.e. one FFT. Only
    indices below ``n_quad // 2`` are free of aliasing, which caps ``j_max``.
    """
    if tau <= 1:
        raise ValueError("tau must exceed 1")
    if n_quad < 256 or n_quad & (n_quad - 1):
        raise ValueError("n_quad must be a power of two >= 256")
    vals = _evaluate_on_level(f, region, tau, n_quad)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"f is not finite on the level curve tau={tau}")
    limit = n_quad // 2
    j_max = limit - 1 if j_max is None else min(j_max, limit - 1)
    spectrum = np.fft.fft(vals)[: j_max + 1] / n_quad
    j = np.arange(j_max + 1)
    coeffs = spectrum * np.exp(-j * math.log(tau))
    return FaberCoefficients(region, tau, coeffs, n_quad, float(np.max(np.abs(vals))))


def faber_polys(region: Region, A: np.ndarray) -> Iterator[np.ndarray]:
    """Yield Phi_0(A), Phi_1(A), ... by the three-term recurrence

        Phi_{j+1} = (2 (A - cI) / (a + b)) Phi_j - ((a - b) / (a + b)) Phi_{j-1},

    with 2I standing in for Phi_0 in the step j = 1. For a disk this is the
    power sequence ((A - cI)/R)^j.
    """
    c, a, b = _axes(region)
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    eye = np.eye(n, dtype=complex)
    if a + b == 0:
        raise ValueError("Faber polynomials are undefined for a point region")
    X = 2 * (A - c * eye) / (a + b)
    q = (a - b) / (a + b)
    yield eye
    prev, cur = 2 * eye, X.copy()
    while True:
        yield cur
        prev, cur = cur, X @ cur - q * prev


def faber_poly_apply(region: Region, j: int, A: np.ndarray) -> np.ndarray:
    if j < 0:
        raise ValueError("degree must be nonnegative")
    if isinstance(region, DiskRegion) or (isinstance(region, EllipseRegion) and region.degenerate == "disk"):
        c, R, _ = _axes(region)
        if isinstance(region, EllipseRegion):
            R = (region.a + region.b) / 2
        X = (np.asarray(A, dtype=complex) - c * np.eye(len(A))) / R
        return np.linalg.matrix_power(X, j)
    for k, P in enumerate(faber_polys(region, A)):
        if k == j:
            return P
    raise AssertionError("unreachable")


def faber_series_apply(coeffs: FaberCoefficients, A: np.ndarray, J: int) -> np.ndarray:
    """Truncated Faber series sum_{j<=J} f_j Phi_j(A)."""
    out = np.zeros((len(A), len(A)), dtype=complex)
    for j, P in enumerate(faber_polys(coeffs.region, A)):
        if j > J:
            break
        out += coeffs[j] * P
    return out


def tail_bound_thm1(coeffs: FaberCoefficients, xi: int) -> float:
    """2 * sum_{j >= xi} |f_j|, truncated once a term drops below 1e-16 of
    the running sum."""
    if xi < 0:
        raise ValueError("xi must be nonnegative")
    mags = np.abs(coeffs.coeffs)
    total = 0.0
    for j in range(xi, len(mags)):
        term = mags[j]
        total += term
        if term <= 1e-16 * total or (total == 0.0 and term == 0.0):
            return 2 * total
    raise ValueError(f"Faber tail not converged by j_max={len(mags) - 1}")


def log_level_max(f, region: Region, tau: float, n_quad: int = DEFAULT_NQUAD) -> float:
    """log of max |f(psi(z))| over the n_quad nodes on |z| = tau."""
    vals = _evaluate_on_level(f, region, tau, n_quad)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.max(np.abs(vals))
    if not np.isfinite(m):
        return math.inf
    return math.log(m) if m > 0 else -math.inf


def _log_thm2(f, region, tau, xi, n_quad):
    lm = log_level_max(f, region, tau, n_quad)
    return (math.log(2.0) + math.log(tau / (tau - 1)) + lm + math.log(NODE_MAX_INFLATION)
            - xi * math.log(tau))


def generic_bound_thm2(f, region: Region, tau: float, xi: int,
                       n_quad: int = DEFAULT_NQUAD) -> float:
    """2 tau/(tau-1) max_{|z|=tau} |f(psi(z))| tau^{-xi}; the max is taken over
    the quadrature nodes and inflated by 0.1%."""
    if tau <= 1:
        raise ValueError("tau must exceed 1")
    val = _log_thm2(f, region, tau, xi, n_quad)
    if val == math.inf:
        raise ValueError(f"f is unbounded on the level curve tau={tau}")
    return math.exp(val) if val > -745 else 0.0


def default_tau_max(region: Region, singularities: Sequence[complex] | None = None) -> float:
    if not singularities:
        return DEFAULT_TAU_MAX
    return 0.999 * min(abs(complex(phi(region, s))) for s in singularities)


def optimize_tau(f, region: Region, xi: int, tau_grid: Sequence[float] | None = None,
                 tau_max: float | None = None, refine: bool = True,
                 n_quad: int = DEFAULT_NQUAD) -> tuple[float, float]:
    """Minimize the level-curve bound over tau.

    A log-spaced grid on (1, tau_max] is scanned; when ``refine`` is set the
    best grid cell is polished by a bounded scalar search in log tau.
    """
    if tau_grid is None:
        tmax = DEFAULT_TAU_MAX if tau_max is None else tau_max
        if tmax <= 1 + 1e-3:
            raise ValueError("no admissible tau: singularity too close to the region")
        grid = np.exp(np.linspace(math.log(1 + 1e-3), math.log(tmax), TAU_GRID_POINTS))
    else:
        grid = np.asarray(tau_grid, dtype=float)
    logs = np.array([_log_thm2(f, region, t, xi, n_quad) if t > 1 else math.inf for t in grid])
    finite = np.isfinite(logs)
    if not finite.any():
        raise ValueError("no admissible tau on the grid")
    i = int(np.argmin(np.where(finite, logs, math.inf)))
    best_tau, best_log = float(grid[i]), float(logs[i])
    if refine and len(grid) >= 3:
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]

        def obj(s):
            v = _log_thm2(f, region, math.exp(s), xi, n_quad)
            return v if np.isfinite(v) else 1e300

        res = minimize_scalar(obj, bounds=(math.log(lo), math.log(hi)), method="bounded",
                              options={"xatol": 1e-6})
        if res.success and res.fun < best_log:
            best_tau, best_log = math.exp(res.x), float(res.fun)
    return best_tau, (math.exp(best_log) if best_log > -745 else 0.0)


def generic_envelope(f, region: Region, singularities: Sequence[complex] | None = None,
                     tau_max: float | None = None, n_quad: int = DEFAULT_NQUAD) -> DecayEnvelope:
    """Envelope from the level-curve bound with tau optimized for every xi."""
    if tau_max is None:
        tau_max = default_tau_max(region, singularities)
    return DecayEnvelope(
        lambda xi: optimize_tau(f, region, xi, tau_max=tau_max, n_quad=n_quad)[1],
        xi_min=1,
        description="faber level-curve bound, tau optimized per xi",
        params={"tau_max": tau_max},
    )
