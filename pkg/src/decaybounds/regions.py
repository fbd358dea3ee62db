"""Field-of-values sampling and enclosing ellipse/disk regions."""
from __future__ import annotations

import cmath
import csv
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .matrices import hermitian_extreme_eigenpair

DEFAULT_ANGLES = 256
DEFAULT_SAFETY = 1.01
DISK_RTOL = 1e-8
SEGMENT_RTOL = 1e-8


class FovSample(NamedTuple):
    theta: float
    point: complex


@dataclass(frozen=True)
class EllipseRegion:
    """Axis-aligned ellipse with center ``center`` and semi-axes ``a``
    (horizontal) and ``b`` (vertical). ``b > a`` describes a vertical ellipse.

    ``degenerate`` is ``"segment"`` when one semi-axis vanishes, ``"disk"``
    when the two coincide, ``"point"`` when both vanish, otherwise ``None``.
    """

    center: complex
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if self.a < 0 or self.b < 0:
            raise ValueError("semi-axes must be nonnegative")

    @property
    def c1(self) -> float:
        return self.center.real

    @property
    def degenerate(self) -> str | None:
        big = max(self.a, self.b)
        if big == 0:
            return "point"
        if min(self.a, self.b) <= SEGMENT_RTOL * big:
            return "segment"
        if abs(self.a - self.b) <= DISK_RTOL * big:
            return "disk"
        return None

    @property
    def vertical(self) -> bool:
        return self.b > self.a and self.degenerate != "disk"

    @property
    def rho(self) -> complex:
        """Focal distance sqrt(a^2 - b^2); imaginary for vertical ellipses."""
        return cmath.sqrt(self.a**2 - self.b**2)

    @property
    def cap_R(self) -> complex:
        return (self.a + self.b) / self.rho

    def level(self, points, slack: float = 0.0) -> np.ndarray:
        """Normalized radius sqrt(((x-c1)/a)^2 + ((y-c2)/b)^2) of points."""
        z = np.asarray(points, dtype=complex) - self.center
        x = z.real / self.a if self.a > 0 else np.where(np.abs(z.real) > slack, np.inf, 0.0)
        y = z.imag / self.b if self.b > 0 else np.where(np.abs(z.imag) > slack, np.inf, 0.0)
        return np.hypot(x, y)

    def contains(self, points, slack: float = 0.0) -> bool:
        return bool(np.all(self.level(points, slack) <= 1.0 + slack))

    def boundary(self, n: int = 256) -> np.ndarray:
        t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return self.center + self.a * np.cos(t) + 1j * self.b * np.sin(t)

    def sup_real(self) -> float:
        return self.c1 + self.a

    def to_dict(self) -> dict:
        return {"kind": "ellipse", "center_re": self.center.real, "center_im": self.center.imag,
                "a": self.a, "b": self.b, "degenerate": self.degenerate}


@dataclass(frozen=True)
class DiskRegion:
    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    @property
    def c1(self) -> float:
        return self.center.real

    @property
    def degenerate(self) -> str | None:
        return "point" if self.radius == 0 else None

    def contains(self, points, slack: float = 0.0) -> bool:
        d = np.abs(np.asarray(points, dtype=complex) - self.center)
        return bool(np.all(d <= self.radius * (1 + slack) + slack))

    def boundary(self, n: int = 256) -> np.ndarray:
        t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return self.center + self.radius * np.exp(1j * t)

    def sup_real(self) -> float:
        return self.c1 + self.radius

    def as_ellipse(self) -> EllipseRegion:
        return EllipseRegion(self.center, self.radius, self.radius)

    def to_dict(self) -> dict:
        return {"kind": "disk", "center_re": self.center.real, "center_im": self.center.imag,
                "radius": self.radius, "degenerate": self.degenerate}


def fov_boundary(A: np.ndarray, n_angles: int = DEFAULT_ANGLES) -> list[FovSample]:
    """Boundary points of W(A) by rotating the Hermitian part.

    For each angle the top eigenvector u of (e^{it}A + e^{-it}A*)/2 gives the
    support point u*Au. The convex hull of the samples lies inside W(A).
    """
    if n_angles < 8:
        raise ValueError("need at least 8 angles")
    A = np.asarray(A, dtype=complex)
    Ah = A.conj().T
    samples = []
    for j in range(n_angles):
        theta = 2 * np.pi * j / n_angles
        rot = np.exp(1j * theta)
        H = (rot * A + Ah / rot) / 2
        _, u = hermitian_extreme_eigenpair((H + H.conj().T) / 2)
        samples.append(FovSample(theta, complex(np.vdot(u, A @ u))))
    return samples


def _points(samples: Sequence) -> np.ndarray:
    return np.array([s.point if isinstance(s, FovSample) else s for s in samples], dtype=complex)


def fit_ellipse(samples: Sequence, safety: float = DEFAULT_SAFETY) -> EllipseRegion:
    """Axis-aligned ellipse around the bounding box of the samples, scaled so
    that every sample is enclosed, then inflated by ``safety``."""
    if safety < 1:
        raise ValueError("safety factor must be >= 1")
    z = _points(samples)
    if z.size < 8:
        raise ValueError("need at least 8 samples")
    xr = (z.real.min(), z.real.max())
    yr = (z.imag.min(), z.imag.max())
    center = complex((xr[0] + xr[1]) / 2, (yr[0] + yr[1]) / 2)
    a = (xr[1] - xr[0]) / 2
    b = (yr[1] - yr[0]) / 2
    big = max(a, b)
    if big == 0:
        return EllipseRegion(center, 0.0, 0.0)
    if b <= SEGMENT_RTOL * big:
        b = 0.0
    if a <= SEGMENT_RTOL * big:
        a = 0.0
    s = float(np.max(EllipseRegion(center, a, b).level(z, slack=SEGMENT_RTOL * big)))
    s = max(s, 1.0)
    return EllipseRegion(center, a * s * safety, b * s * safety)


def fit_disk(samples: Sequence, safety: float = DEFAULT_SAFETY) -> DiskRegion:
    if safety < 1:
        raise ValueError("safety factor must be >= 1")
    z = _points(samples)
    center = complex((z.real.min() + z.real.max()) / 2, (z.imag.min() + z.imag.max()) / 2)
    return DiskRegion(center, safety * float(np.max(np.abs(z - center))))


def inflate_for_perturbation(E: EllipseRegion, eps_m: float) -> EllipseRegion:
    """Ellipse whose boundary keeps distance >= eps_m from that of ``E``.

    Both semi-axes are scaled by 1 + eps_m/min(a, b). For a >= b this is
    a(1 + eps_m/b), b + eps_m; the min also covers vertical ellipses.
    """
    if eps_m < 0:
        raise ValueError("perturbation radius must be nonnegative")
    short = min(E.a, E.b)
    if short <= 0:
        raise ValueError("cannot inflate a region with a zero semi-axis")
    s = 1 + eps_m / short
    return EllipseRegion(E.center, E.a * s, E.b * s)


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_fov_csv(path, samples: Sequence[FovSample], region=None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if region is not None:
            for key, value in region.to_dict().items():
                fh.write(f"# {key}={fmt(value) if isinstance(value, float) else value}\n")
        w = csv.writer(fh)
        w.writerow(["theta", "re", "im"])
        for s in samples:
            w.writerow([fmt(s.theta), fmt(s.point.real), fmt(s.point.imag)])

