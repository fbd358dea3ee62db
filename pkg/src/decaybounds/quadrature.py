"""Adaptive Gauss-Kronrod integration (QUADPACK via scipy)."""
from __future__ import annotations

import math

from scipy import integrate

SUBDIVISION_LIMIT = 20_000


class QuadratureError(RuntimeError):
    pass


def integrate_adaptive(g, lo: float, hi: float, tol: float = 1e-10,
                       rel_tol: float | None = None) -> float:
    """Integrate g over [lo, hi] (hi may be +inf).

    Targets |error| <= tol * (1 + |result|); pass ``rel_tol`` to control the
    relative part independently (e.g. for integrals far below one).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not lo < hi:
        raise ValueError("need lo < hi")
    rel = tol if rel_tol is None else rel_tol
    out = integrate.quad(g, lo, hi, epsabs=tol, epsrel=rel, limit=SUBDIVISION_LIMIT,
                         full_output=1)
    val, err, info = out[:3]
    if not math.isfinite(val):
        raise QuadratureError("integral is not finite")
    if len(out) > 3:
        # QUADPACK flagged a problem (ier > 0)
        if info["last"] >= SUBDIVISION_LIMIT:
            raise QuadratureError("subdivision limit exceeded")
        if err > 10 * max(tol, rel * abs(val)):
            raise QuadratureError(f"requested accuracy not reached: {out[3].splitlines()[0]}")
    return float(val)
