"""Loop geometry and mutual inductance.

Coaxial pairs use the filamentary closed form built on complete elliptic
integrals; arbitrary lateral/tilted placements fall back to direct Neumann
quadrature.  Conductor thickness is ignored throughout: loop self-R/L/C are
extracted circuit parameters, not computed here.

Elliptic-integral convention: the argument is the parameter m = k^2, where
k is the modulus.  Every call site in this module passes m = k^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, NoSolutionError
from .solvers import bisect_root

MU_0 = 4.0e-7 * math.pi
SPEED_OF_LIGHT = 299_792_458.0

# Neumann quadrature: starting grid, refinement cap, convergence target.
# The absolute floor (in units of mu0*sqrt(r1*r2)) declares symmetry-cancelled
# integrals converged instead of chasing summation noise around zero.
_QUAD_N0 = 64
_QUAD_NMAX = 2048
_QUAD_RTOL = 1e-8
_QUAD_ZERO_FLOOR = 1e-12


@dataclass(frozen=True)
class LoopGeometry:
    """Physical description of one shielded loop and its coaxial feed."""

    radius: float
    feed_length: float = 0.0
    feed_z0: float = 50.0
    feed_eps_eff: float = 2.1

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError(f"loop radius must be positive, got {self.radius!r}")
        if self.feed_length < 0.0:
            raise ValueError("feed length must be non-negative")
        if self.feed_z0 <= 0.0 or self.feed_eps_eff < 1.0:
            raise ValueError("feed constants out of range")

    def beta(self, omega: float) -> float:
        """Feedline phase constant at omega, rad/m."""
        return omega * math.sqrt(self.feed_eps_eff) / SPEED_OF_LIGHT


@dataclass(frozen=True)
class Placement:
    """Relative position of loop 2: axial d, lateral offset c, tilt theta."""

    d: float
    c: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if self.d <= 0.0:
            raise ValueError("axial distance must be positive")
        if self.c < 0.0:
            raise ValueError("lateral offset must be non-negative")
        if not (0.0 <= self.theta < math.pi):
            raise ValueError("tilt must lie in [0, pi)")

    @property
    def is_coaxial(self) -> bool:
        return self.c == 0.0 and self.theta == 0.0


def elliptic_k(m: float) -> float:
    """Complete elliptic integral K(m), m = k^2, by AGM iteration."""
    if m < 0.0:
        raise ValueError(f"parameter must be non-negative, got {m!r}")
    if m >= 1.0:
        raise ValueError(f"K(m) diverges for m >= 1, got {m!r}")
    a, b = 1.0, math.sqrt(1.0 - m)
    for _ in range(40):
        if abs(a - b) <= 4e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def elliptic_e(m: float) -> float:
    """Complete elliptic integral E(m), m = k^2, by AGM iteration."""
    if not (0.0 <= m <= 1.0):
        raise ValueError(f"parameter must lie in [0, 1], got {m!r}")
    if m == 1.0:
        return 1.0
    a, b = 1.0, math.sqrt(1.0 - m)
    c_sq_sum = 0.5 * m  # 2^(n-1) * c_n^2 accumulated from c_0 = sqrt(m)
    pow2 = 1.0
    for _ in range(40):
        if abs(a - b) <= 4e-16 * a:
            break
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        c_sq_sum += pow2 * c * c
        pow2 *= 2.0
    return math.pi / (2.0 * a) * (1.0 - c_sq_sum)


def mutual_inductance_coaxial(r1: float, r2: float, d: float) -> float:
    """Mutual inductance of coaxial filamentary loops (henry).

    M = mu0 sqrt(r1 r2) [(2/k - k) K(k^2) - (2/k) E(k^2)],
    k^2 = 4 r1 r2 / ((r1+r2)^2 + d^2).  Strictly decreasing in d.
    """
    if r1 <= 0.0 or r2 <= 0.0 or d <= 0.0:
        raise ValueError("radii and distance must be positive")
    m = 4.0 * r1 * r2 / ((r1 + r2) ** 2 + d * d)
    k = math.sqrt(m)
    return (
        MU_0
        * math.sqrt(r1 * r2)
        * ((2.0 / k - k) * elliptic_k(m) - (2.0 / k) * elliptic_e(m))
    )


def _loop_samples(radius, center, theta, n):
    # Points and d(point)/d(phi) tangents of a circle of given radius, tilted
    # by theta about the y-axis through its center, then translated.
    phi = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    cos_p, sin_p = np.cos(phi), np.sin(phi)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    pts = np.empty((n, 3))
    pts[:, 0] = radius * cos_p * cos_t + center[0]
    pts[:, 1] = radius * sin_p + center[1]
    pts[:, 2] = -radius * cos_p * sin_t + center[2]
    tan = np.empty((n, 3))
    tan[:, 0] = -radius * sin_p * cos_t
    tan[:, 1] = radius * cos_p
    tan[:, 2] = radius * sin_p * sin_t
    return pts, tan


def _neumann_sum(r1, r2, placement, n):
    pts1, tan1 = _loop_samples(r1, (0.0, 0.0, 0.0), 0.0, n)
    pts2, tan2 = _loop_samples(
        r2, (placement.c, 0.0, placement.d), placement.theta, n
    )
    diff = pts1[:, None, :] - pts2[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    dots = tan1 @ tan2.T
    dphi = 2.0 * math.pi / n
    return MU_0 / (4.0 * math.pi) * dphi * dphi * np.sum(dots / dist)


def _min_separation(r1: float, r2: float, p: Placement, n: int = 720) -> float:
    # Exact point-to-circle distance from n samples of loop 1 to loop 2.
    pts1, _ = _loop_samples(r1, (0.0, 0.0, 0.0), 0.0, n)
    center = np.array([p.c, 0.0, p.d])
    normal = np.array([math.sin(p.theta), 0.0, math.cos(p.theta)])
    q = pts1 - center
    axial = q @ normal
    radial_sq = np.einsum("ij,ij->i", q, q) - axial * axial
    radial = np.sqrt(np.maximum(radial_sq, 0.0))
    return float(np.sqrt((radial - r2) ** 2 + axial * axial).min())


def mutual_inductance(g1: LoopGeometry, g2: LoopGeometry, p: Placement) -> float:
    """Mutual inductance for an arbitrary placement via the Neumann formula.

    M = mu0/(4 pi) * oint oint (dl1 . dl2) / |x1 - x2|, evaluated with the
    periodic trapezoid rule in both loop angles and refined by doubling the
    grid until successive values agree to 1e-8 relative.  Reduces to the
    coaxial closed form for c = 0, theta = 0.
    """
    sep = _min_separation(g1.radius, g2.radius, p)
    if sep < 1e-3 * max(g1.radius, g2.radius):
        raise GeometryError(
            f"loops intersect or nearly touch (min separation {sep:.3e} m)"
        )
    n = _QUAD_N0
    prev = _neumann_sum(g1.radius, g2.radius, p, n)
    floor = MU_0 * math.sqrt(g1.radius * g2.radius) * _QUAD_ZERO_FLOOR
    while n < _QUAD_NMAX:
        n *= 2
        value = _neumann_sum(g1.radius, g2.radius, p, n)
        if abs(value - prev) <= _QUAD_RTOL * max(abs(value), abs(prev)) + floor:
            return value
        prev = value
    return prev


def distance_for_mutual(g1: LoopGeometry, g2: LoopGeometry, m_target: float) -> float:
    """Coaxial distance at which the closed-form M equals m_target.

    Solved by bisection to 1e-9 m; raises NoSolutionError when the target
    lies outside the attainable coaxial range.
    """
    if m_target <= 0.0:
        raise NoSolutionError(f"target mutual inductance must be positive, got {m_target!r}")
    r1, r2 = g1.radius, g2.radius

    def f(d: float) -> float:
        return mutual_inductance_coaxial(r1, r2, d) - m_target

    # The filamentary closed form diverges only logarithmically as d -> 0,
    # and the elliptic parameter saturates in floating point below ~1e-6 r;
    # targets above M(lo) are declared unattainable.
    lo = 1e-6 * min(r1, r2)
    if f(lo) < 0.0:
        raise NoSolutionError(f"target {m_target!r} H exceeds the attainable range")
    hi = max(r1 + r2, 2.0 * lo)
    for _ in range(60):
        if f(hi) < 0.0:
            break
        hi *= 2.0
    else:
        raise NoSolutionError(f"target {m_target!r} H is below the solver floor")
    return bisect_root(f, lo, hi, abs_tol=1e-9)
