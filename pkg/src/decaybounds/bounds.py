"""Closed-form decay envelopes for e^A, A^{-1/2}, e^{-sqrt(A)}, Laplace-Stieltjes
functions and functions of Kronecker sums."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .faber import DecayEnvelope, phi
from .matrices import band_distance
from .quadrature import integrate_adaptive
from .regions import DiskRegion, EllipseRegion

CROUZEIX = 11.08
QUAD_TOL = 1e-10
TAU_EPS = 1e-12


@dataclass(frozen=True)
class StieltjesMeasure:
    """dmu(t) = weight(t) dt on [t_lo, t_hi] plus point masses (t, mass)."""

    weight: Callable[[float], float]
    t_lo: float = 0.0
    t_hi: float = math.inf
    point_masses: tuple = field(default_factory=tuple)
    name: str = ""


# 1/z = int_0^inf e^{-tz} dt
MU_INVERSE = StieltjesMeasure(lambda t: 1.0, 0.0, math.inf, name="inverse")
# (1 - e^{-z})/z = int_0^1 e^{-tz} dt
MU_PHI1 = StieltjesMeasure(lambda t: 1.0, 0.0, 1.0, name="phi1")


def _as_ellipse(E) -> EllipseRegion:
    return E.as_ellipse() if isinstance(E, DiskRegion) else E


def _log_exp_bound(xi: float, c1: float, a: float, b: float) -> float:
    d = a * a - b * b
    s = math.sqrt(xi * xi + d)
    q = 1 + d / (xi * xi + xi * s)
    if a + b == 0:
        return -math.inf
    return (math.log(2) + c1 + math.log((xi + s) / (xi + s - (a + b)))
            + xi * (math.log(a + b) + q - math.log(xi + s)))


def exp_bound(E) -> DecayEnvelope:
    """Envelope for |(e^A)_{k,l}| with W(A) inside the ellipse E, valid for
    xi > b. Vertical ellipses (b > a) use the same expression."""
    E = _as_ellipse(E)
    a, b, c1 = E.a, E.b, E.c1

    def bound(xi):
        v = _log_exp_bound(float(xi), c1, a, b)
        return math.exp(v) if v > -745 else 0.0

    return DecayEnvelope(bound, xi_min=math.floor(b) + 1, description="exp: ellipse corollary",
                         params={"a": a, "b": b, "c1": c1})


def _min_modulus(f_scalar, lo: float, hi: float, n: int = 4096, extra=()) -> tuple[float, float]:
    """Global minimum of f_scalar over [lo, hi] by sampling plus a local
    bounded polish. Returns (argmin, min)."""
    grid = np.linspace(lo, hi, n)
    vals = np.array([f_scalar(x) for x in grid])
    i = int(np.argmin(vals))
    best_x, best_v = float(grid[i]), float(vals[i])
    for x in extra:
        v = f_scalar(x)
        if v < best_v:
            best_x, best_v = x, v
    res = minimize_scalar(f_scalar, bounds=(grid[max(i - 1, 0)], grid[min(i + 1, n - 1)]),
                          method="bounded", options={"xatol": 1e-12 * max(1.0, abs(hi - lo))})
    if res.success and res.fun < best_v:
        best_x, best_v = float(res.x), float(res.fun)
    return best_x, best_v


def _ray_min(E: EllipseRegion, t0: float) -> float:
    """min |phi(-t)| over t >= t0 (the branch cut (-inf, -t0])."""
    scale = abs(E.center) + E.a + E.b + t0
    f = lambda u: abs(complex(phi(E, -(t0 + u * u))))  # noqa: E731
    # |phi(-t)| grows linearly for large t, so [t0, t0 + 100*scale] suffices
    _, v = _min_modulus(f, 0.0, math.sqrt(100 * scale), extra=(0.0,))
    return v


def _require_horizontal(E: EllipseRegion, what: str) -> None:
    if E.vertical:
        raise ValueError(f"{what} bound needs a >= b (vertical ellipses only supported for exp)")


def _touches_cut(E: EllipseRegion) -> bool:
    # the ellipse meets (-inf, 0] iff its leftmost point on the real line is <= 0
    c, a, b = E.center, E.a, E.b
    if abs(c.imag) > b:
        return False
    half = a * math.sqrt(max(0.0, 1 - (c.imag / b) ** 2)) if b > 0 else a
    return c.real - half <= 0


def invsqrt_tau(E, eps: float) -> float:
    """Largest tau whose level curve keeps the closed disk |w| <= eps and the
    branch cut outside."""
    E = _as_ellipse(E)
    c = E.center
    # the circle point facing the center, where w - c = -c(1 - eps/|c|)
    closed = abs(complex(phi(E, eps * c / abs(c)))) if c != 0 else math.inf
    circ = lambda th: abs(complex(phi(E, eps * cmath.exp(1j * th))))  # noqa: E731
    th0 = cmath.phase(c)
    _, vc = _min_modulus(circ, th0 - math.pi, th0 + math.pi, extra=(th0,))
    return min(closed, vc, _ray_min(E, eps))


def invsqrt_tau_printed(E, eps: float) -> float:
    """Closed-form tau: |phi| at the point eps*c/|c|."""
    E = _as_ellipse(E)
    return abs(complex(phi(E, eps * E.center / abs(E.center))))


def invsqrt_eps_limit(E) -> float:
    """Sufficient upper limit |c| - sqrt(a(a+b)) for eps."""
    E = _as_ellipse(E)
    return abs(E.center) - math.sqrt(E.a * (E.a + E.b))


def q2_printed(a: float, b: float, c: complex, eps: float) -> float:
    """Prefactor as typeset, with (a^2 - b^2)^2 under the root."""
    cp = c * (1 - eps / abs(c))
    num = abs(cp + cmath.sqrt(cp * cp - (a * a - b * b) ** 2))
    return num / (num - (a + b))


def q2_rho(a: float, b: float, c: complex, eps: float) -> float:
    """Prefactor with rho^2 = a^2 - b^2, i.e. tau/(tau - 1)."""
    cp = c * (1 - eps / abs(c))
    num = abs(cp + cmath.sqrt(cp * cp - (a * a - b * b)))
    return num / (num - (a + b))


def _geometric_envelope(prefactor: float, tau: float, description: str, params: dict) -> DecayEnvelope:
    if tau <= 1 + TAU_EPS:
        return DecayEnvelope(lambda xi: math.inf, xi_min=math.inf, description=description + " (tau <= 1)",
                             params=params)
    lp = math.log(prefactor) + math.log(tau / (tau - 1))
    lt = math.log(tau)

    def bound(xi):
        v = lp - xi * lt
        return math.exp(v) if v > -745 else 0.0

    return DecayEnvelope(bound, xi_min=1, description=description, params=params)


def invsqrt_bound(E, eps: float) -> DecayEnvelope:
    """Envelope (2/sqrt(eps)) tau/(tau-1) tau^{-xi} for A^{-1/2}."""
    E = _as_ellipse(E)
    _require_horizontal(E, "inverse square root")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if _touches_cut(E):
        raise ValueError("region meets the branch cut (-inf, 0]")
    tau = invsqrt_tau(E, eps)
    return _geometric_envelope(2 / math.sqrt(eps), tau, "invsqrt: ellipse corollary",
                               {"eps": eps, "tau": tau, "tau_printed": invsqrt_tau_printed(E, eps),
                                "eps_limit": invsqrt_eps_limit(E)})


def expsqrt_tau(E) -> float:
    E = _as_ellipse(E)
    return min(abs(complex(phi(E, 0.0))), _ray_min(E, 0.0))


def expsqrt_bound(E) -> DecayEnvelope:
    """Envelope 2 tau/(tau-1) tau^{-xi} for e^{-sqrt(A)}, tau = |phi(0)| (or
    smaller if the level curve would cross the negative axis)."""
    E = _as_ellipse(E)
    _require_horizontal(E, "exp(-sqrt)")
    if _touches_cut(E):
        raise ValueError("region meets the branch cut (-inf, 0]")
    tau = expsqrt_tau(E)
    if tau <= 1 + TAU_EPS:
        raise ValueError("region too close to the origin (tau <= 1)")
    return _geometric_envelope(2.0, tau, "expsqrt: ellipse corollary",
                               {"tau": tau, "tau_phi0": abs(complex(phi(E, 0.0)))})


# Laplace-Stieltjes functions ------------------------------------------------

def _log_exp_disk(t: float, xi: float, c1: float, R: float) -> float:
    """log of 2 xi/(xi - Rt) e^{-t c1} (eRt/xi)^xi, the bound for e^{-tA}."""
    if t == 0 or R == 0:
        return -math.inf
    return math.log(2 * xi / (xi - R * t)) - t * c1 + xi * (1 + math.log(R * t / xi))


def _crouzeix_log(t: float, c1: float, R: float) -> float:
    return math.log(CROUZEIX) - t * (c1 - R)


def laplace_stieltjes_bound(mu: StieltjesMeasure, D: DiskRegion, xi: int, cap: bool = True,
                            tol: float = QUAD_TOL) -> float:
    """Bound for |f(A)_{k,l}|, f(z) = int e^{-tz} dmu(t), W(A) in disk D.

    On t < xi/R the exponential corollary for e^{-tA} is integrated; beyond
    xi/R the Crouzeix bound 11.08 e^{-t(c1-R)} is used. With ``cap`` the
    pointwise minimum of the two is integrated on t < xi/R as well, which
    removes the logarithmic endpoint singularity at t = xi/R.
    """
    if xi <= 0:
        raise ValueError("xi must be positive")
    c1, R = D.c1, D.radius
    t_split = xi / R if R > 0 else math.inf
    lo, hi = mu.t_lo, mu.t_hi

    def near(t):
        e = _log_exp_disk(t, xi, c1, R)
        if cap:
            e = min(e, _crouzeix_log(t, c1, R))
        return mu.weight(t) * math.exp(e) if e > -745 else 0.0

    def far(t):
        return mu.weight(t) * math.exp(_crouzeix_log(t, c1, R))

    total = 0.0
    a, b = lo, min(hi, t_split)
    if a < b:
        if not cap and b >= t_split:
            return math.inf
        pieces = [a, b]
        if cap and R > 0:
            g = lambda t: _log_exp_disk(t, xi, c1, R) - _crouzeix_log(t, c1, R)  # noqa: E731
            lo_t = max(a, 1e-300)
            hi_t = min(b, t_split * (1 - 1e-12))
            if lo_t < hi_t and g(lo_t) < 0 < g(hi_t):
                pieces = [a, brentq(g, lo_t, hi_t, xtol=1e-14), b]
        for p, q in zip(pieces[:-1], pieces[1:]):
            if p < q:
                total += integrate_adaptive(near, p, q, tol=tol * 1e-6, rel_tol=tol)
    a, b = max(lo, t_split), hi
    if a < b:
        if c1 <= R and b == math.inf:
            raise ValueError("Crouzeix tail diverges: need Re(c) > R for infinite support")
        total += integrate_adaptive(far, a, b, tol=tol * 1e-6, rel_tol=tol)
    for t, mass in mu.point_masses:
        if t < t_split:
            e = _log_exp_disk(t, xi, c1, R)
            if cap:
                e = min(e, _crouzeix_log(t, c1, R))
        else:
            e = _crouzeix_log(t, c1, R)
        total += mass * (math.exp(e) if e > -745 else 0.0)
    return total


@lru_cache(maxsize=4096)
def _phi1_integral(xi: int, c1: float, R: float) -> float:
    # int_0^1 e^{-t c1} t^xi / (xi - R t) dt
    g = lambda t: math.exp(-t * c1) * t**xi / (xi - R * t)  # noqa: E731
    return integrate_adaptive(g, 0.0, 1.0, tol=1e-300, rel_tol=1e-12)


def phi1_bound(D: DiskRegion) -> DecayEnvelope:
    """Envelope 2 xi int_0^1 e^{-t c1}/(xi - Rt) (eRt/xi)^xi dt for
    A^{-1}(I - e^{-A}), valid for xi > R."""
    c1, R = D.c1, D.radius

    def bound(xi):
        if R == 0:
            return 0.0
        lv = math.log(2 * xi) + xi * (1 + math.log(R / xi))
        v = lv + math.log(_phi1_integral(int(xi), c1, R))
        return math.exp(v) if v > -745 else 0.0

    return DecayEnvelope(bound, xi_min=math.floor(R) + 1, description="phi1: disk bound",
                         params={"c1": c1, "R": R})


@lru_cache(maxsize=4096)
def kron_I(xi: int, c1: float, R: float) -> float:
    """I(xi) = int_0^1 e^{-2 t c1} t^{2 xi} / (xi - R t)^2 dt."""
    g = lambda t: math.exp(-2 * t * c1) * t ** (2 * xi) / (xi - R * t) ** 2  # noqa: E731
    return integrate_adaptive(g, 0.0, 1.0, tol=1e-300, rel_tol=1e-12)


def kron_phi1_bound(D: DiskRegion, xi1: int, xi2: int) -> float:
    """Bound for |f(A (+) A)_{k,l}|, f(z) = (1 - e^{-z})/z; inf unless both
    xi1, xi2 > R."""
    c1, R = D.c1, D.radius
    if xi1 <= R or xi2 <= R:
        return math.inf
    if R == 0:
        return 0.0
    lv = (math.log(4) + math.log(xi1) + math.log(xi2) + (xi1 + xi2) * (1 + math.log(R))
          - xi1 * math.log(xi1) - xi2 * math.log(xi2)
          + 0.5 * (math.log(kron_I(int(xi1), c1, R)) + math.log(kron_I(int(xi2), c1, R))))
    return math.exp(lv) if lv > -745 else 0.0


def lex_split(row: int, col: int, n: int) -> tuple[int, int, int, int]:
    """Split 1-based indices of an n^2 x n^2 matrix: row = (k2-1) n + k1,
    col = (l2-1) n + l1. Returns (k1, k2, l1, l2)."""
    if not (1 <= row <= n * n and 1 <= col <= n * n):
        raise ValueError("index out of range")
    k2, k1 = divmod(row - 1, n)
    l2, l1 = divmod(col - 1, n)
    return k1 + 1, k2 + 1, l1 + 1, l2 + 1


def kron_distances(row: int, col: int, n: int, beta: int, gamma: int) -> tuple[int, int]:
    """(xi1, xi2) for an entry of A (+) A; 0 where the factor index is diagonal."""
    k1, k2, l1, l2 = lex_split(row, col, n)
    xi1 = 0 if k1 == l1 else band_distance(k1, l1, beta, gamma)
    xi2 = 0 if k2 == l2 else band_distance(k2, l2, beta, gamma)
    return xi1, xi2


def crouzeix_norm_bound(sup_abs_f: float) -> float:
    return CROUZEIX * sup_abs_f
