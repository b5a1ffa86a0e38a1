"""Closed-form theory of two magnetically coupled series resonators.

Models a source loop and a load loop, each a series R-L-C branch, coupled
through a mutual inductance m12.  Every quantity here is a dimensionless
power ratio or an impedance; source amplitude never appears.  Operations
that rely on the identical-loop simplification (r1=r2, l1=l2, c1=c2 with
equal real terminations) reject non-identical links with ModelDomainError;
the generic operations accept any link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ModelDomainError, WeakCouplingError
from .solvers import bisect_root

# Relative tolerance of the critical-coupling band: |margin| below this
# fraction of max((w*m12)^2, (r+rl)^2) classifies as critical.
CRITICAL_TOLERANCE = 1e-9

# Identical-loop check tolerance (relative, per element value).
_IDENTICAL_RTOL = 1e-9

STRONG = "strong"
CRITICAL = "critical"
WEAK = "weak"


@dataclass(frozen=True)
class Resonator:
    """Series R-L-C circuit of one loop: loss r (ohm), l (henry), c (farad)."""

    r: float
    l: float
    c: float

    def __post_init__(self):
        if not (self.r > 0.0 and self.l > 0.0 and self.c > 0.0):
            raise ValueError(f"resonator elements must be positive: {self}")

    @property
    def omega0(self) -> float:
        """Self-resonance 1/sqrt(l*c) in rad/s."""
        return 1.0 / math.sqrt(self.l * self.c)

    @property
    def f0(self) -> float:
        """Self-resonance in Hz."""
        return self.omega0 / (2.0 * math.pi)

    def reactance(self, omega: float) -> float:
        """Series reactance w*l - 1/(w*c) at omega."""
        return omega * self.l - 1.0 / (omega * self.c)


@dataclass(frozen=True)
class Link:
    """Two resonators coupled by mutual inductance m12 (henry)."""

    res1: Resonator
    res2: Resonator
    m12: float

    def __post_init__(self):
        lim = math.sqrt(self.res1.l * self.res2.l)
        if not (0.0 <= self.m12 < lim):
            raise ValueError(
                f"m12 must satisfy 0 <= m12 < sqrt(l1*l2) = {lim:.4e}, got {self.m12!r}"
            )

    @property
    def is_identical(self) -> bool:
        r1, r2 = self.res1, self.res2
        return (
            abs(r1.r - r2.r) <= _IDENTICAL_RTOL * max(r1.r, r2.r)
            and abs(r1.l - r2.l) <= _IDENTICAL_RTOL * max(r1.l, r2.l)
            and abs(r1.c - r2.c) <= _IDENTICAL_RTOL * max(r1.c, r2.c)
        )


@dataclass(frozen=True)
class Termination:
    """Source and load impedances presented to the two loops."""

    zs: complex
    zl: complex

    def __post_init__(self):
        if not (complex(self.zs).real > 0.0 and complex(self.zl).real > 0.0):
            raise ValueError("terminations need positive real parts")


@dataclass(frozen=True)
class CouplingRegime:
    """Classification tag plus the signed margin (w*m12)^2 - (r+rl)^2."""

    tag: str
    margin: float


@dataclass(frozen=True)
class ModePair:
    """Split resonances in Hz; the upper frequency is the even mode."""

    f_even: float
    f_odd: float

    def __post_init__(self):
        if self.f_even < self.f_odd:
            raise ValueError("even mode must be the upper frequency")


def _require_identical(link: Link, what: str) -> None:
    if not link.is_identical:
        raise ModelDomainError(f"{what} requires the identical-loop form")


def input_impedance(link: Link, zl: complex, omega: float) -> complex:
    """Impedance seen at the source-loop terminals with the load in place."""
    if omega <= 0.0:
        raise ValueError("omega must be positive")
    r1, r2 = link.res1, link.res2
    w_m = omega * link.m12
    z_loop2 = r2.r + zl + 1j * r2.reactance(omega)
    return r1.r + 1j * r1.reactance(omega) + (w_m * w_m) / z_loop2


def output_impedance(link: Link, zs: complex, omega: float) -> complex:
    """Impedance seen at the load-loop terminals with the source in place."""
    if omega <= 0.0:
        raise ValueError("omega must be positive")
    r1, r2 = link.res1, link.res2
    w_m = omega * link.m12
    z_loop1 = r1.r + zs + 1j * r1.reactance(omega)
    return r2.r + 1j * r2.reactance(omega) + (w_m * w_m) / z_loop1


def reflection_mag_sq(link: Link, zs: complex, zl: complex, omega: float) -> float:
    """|Gamma_in|^2 with Gamma_in = (Zin - zs)/(Zin + zs)."""
    zin = input_impedance(link, zl, omega)
    gamma = (zin - zs) / (zin + zs)
    return abs(gamma) ** 2


def _mismatch_factor(zin: complex, zs: complex) -> float:
    # Power accepted over power available, 4*Re(zs)*Re(zin)/|zin+zs|^2.  For
    # real sources this equals 1 - |Gamma_in|^2 exactly (without the
    # catastrophic cancellation of computing it that way); for reactive
    # sources it remains the physical mismatch factor, reaching 1 at the
    # conjugate match.
    return 4.0 * complex(zs).real * zin.real / abs(zin + zs) ** 2


def power_gain(link: Link, zl: complex, omega: float) -> float:
    """Power delivered to the load over power entering the source loop."""
    r2 = link.res2
    w_m = omega * link.m12
    z_loop2 = r2.r + zl + 1j * r2.reactance(omega)
    zin = input_impedance(link, zl, omega)
    if w_m == 0.0:
        return 0.0
    return (w_m * w_m) * complex(zl).real / (abs(z_loop2) ** 2 * zin.real)


def total_efficiency(link: Link, zs: complex, zl: complex, omega: float) -> float:
    """Load power over power available from the source: (1-|Gamma|^2) * gain."""
    zin = input_impedance(link, zl, omega)
    if link.m12 == 0.0:
        return 0.0
    r2 = link.res2
    w_m = omega * link.m12
    z_loop2 = r2.r + zl + 1j * r2.reactance(omega)
    gain = (w_m * w_m) * complex(zl).real / (abs(z_loop2) ** 2 * zin.real)
    return _mismatch_factor(zin, zs) * gain


def reflection_mag_sq_closed_form(link: Link, rl: float, omega):
    """Identical-loop |Gamma_in|^2 for real equal terminations rl.

    Accepts scalar or ndarray omega.
    """
    _require_identical(link, "reflection_mag_sq_closed_form")
    r = link.res1.r
    l = link.res1.l
    c = link.res1.c
    rsum = r + rl
    x = omega * l - 1.0 / (omega * c)
    w_m_sq = (omega * link.m12) ** 2
    num = ((r - rl) * rsum - x * x + w_m_sq) ** 2 + 4.0 * r * r * x * x
    den = (rsum * rsum - x * x + w_m_sq) ** 2 + 4.0 * rsum * rsum * x * x
    return num / den


def total_efficiency_closed_form(link: Link, rl: float, omega):
    """Identical-loop efficiency for real equal terminations rl.

    [2*rl*w*m12]^2 / ([(r+rl)^2 - x^2 + (w*m12)^2]^2 + 4*(r+rl)^2*x^2)
    with x = w*l - 1/(w*c).  Accepts scalar or ndarray omega.
    """
    _require_identical(link, "total_efficiency_closed_form")
    r = link.res1.r
    l = link.res1.l
    c = link.res1.c
    rsum = r + rl
    x = omega * l - 1.0 / (omega * c)
    w_m = omega * link.m12
    num = (2.0 * rl * w_m) ** 2
    den = (rsum * rsum - x * x + w_m * w_m) ** 2 + 4.0 * rsum * rsum * x * x
    return num / den


def efficiency_at_resonance(link: Link, rl: float) -> float:
    """Efficiency at the isolated-loop resonance w0, identical-loop form."""
    _require_identical(link, "efficiency_at_resonance")
    r = link.res1.r
    rsum = r + rl
    w_m = link.res1.omega0 * link.m12
    return (2.0 * rl * w_m / (rsum * rsum + w_m * w_m)) ** 2


def classify_coupling(link: Link, rl: float, omega: float) -> CouplingRegime:
    """Strong / critical / weak per the sign of (w*m12)^2 - (r2+rl)^2."""
    w_m_sq = (omega * link.m12) ** 2
    rsum_sq = (link.res2.r + rl) ** 2
    margin = w_m_sq - rsum_sq
    band = CRITICAL_TOLERANCE * max(w_m_sq, rsum_sq)
    if margin > band:
        tag = STRONG
    elif margin < -band:
        tag = WEAK
    else:
        tag = CRITICAL
    return CouplingRegime(tag, margin)


def _split_condition(link: Link, rl: float):
    # F(w) = x(w)^2 + (r+rl)^2 - (w*m12)^2; zero at the split resonances.
    r = link.res1.r
    l = link.res1.l
    c = link.res1.c
    rsum_sq = (r + rl) ** 2
    m = link.m12

    def f(omega: float) -> float:
        x = omega * l - 1.0 / (omega * c)
        return x * x + rsum_sq - (omega * m) ** 2

    return f


def mode_split_approx(link: Link, rl: float) -> float:
    """Approximate even/odd separation sqrt((w0*m12/l)^2 - ((r+rl)/l)^2), rad/s."""
    _require_identical(link, "mode_split_approx")
    r = link.res1.r
    l = link.res1.l
    w0 = link.res1.omega0
    arg = (w0 * link.m12 / l) ** 2 - ((r + rl) / l) ** 2
    if arg < 0.0:
        raise WeakCouplingError(
            "no real frequency split: link is weakly coupled at w0"
        )
    return math.sqrt(arg)


def mode_frequencies(link: Link, rl: float) -> ModePair | None:
    """Even and odd split resonances, or None when weakly coupled.

    Solves x(w)^2 = (w*m12)^2 - (r+rl)^2 by bisection on brackets placed
    around w0.  The bisection runs to machine precision (well inside the
    1e-12 relative contract) so mode-frequency identities hold tightly.
    """
    _require_identical(link, "mode_frequencies")
    w0 = link.res1.omega0
    regime = classify_coupling(link, rl, w0)
    if regime.tag == WEAK:
        return None
    if regime.tag == CRITICAL:
        f0 = w0 / (2.0 * math.pi)
        return ModePair(f0, f0)
    f = _split_condition(link, rl)
    dw = mode_split_approx(link, rl)

    hi = w0 * 1.5 + 2.0 * dw
    for _ in range(80):
        if f(hi) > 0.0:
            break
        hi *= 1.5
    w_even = bisect_root(f, w0, hi, rel_tol=4e-16)

    lo = max(w0 * 0.5 - 2.0 * dw, 1e-9 * w0)
    for _ in range(80):
        if f(lo) > 0.0:
            break
        lo *= 0.5
    w_odd = bisect_root(f, lo, w0, rel_tol=4e-16)
    two_pi = 2.0 * math.pi
    return ModePair(w_even / two_pi, w_odd / two_pi)


def current_ratio(link: Link, rl: float, omega: float) -> complex:
    """Load-loop over source-loop current, -j*w*m12 / (j*x2 + r2 + rl).

    The reference directions make the ratio exactly -j*w0*m12/(r+rl) at the
    isolated resonance.  At the split modes the magnitude is 1; the phase is
    -pi + arcsin((r+rl)/(w*m12)) at the even (upper) mode and
    -arcsin((r+rl)/(w*m12)) at the odd (lower) mode.
    """
    r2 = link.res2
    denom = rl + r2.r + 1j * r2.reactance(omega)
    return -1j * omega * link.m12 / denom


def strong_coupling_constants(r: float, rl: float) -> tuple[float, float]:
    """Mode-frequency reflection and efficiency plateau: ((r/(r+rl))^2, (rl/(r+rl))^2)."""
    rsum = r + rl
    return (r / rsum) ** 2, (rl / rsum) ** 2


def optimal_terminations(link: Link, omega: float) -> Termination:
    """Simultaneous conjugate-match source and load impedances at omega."""
    r1, r2 = link.res1, link.res2
    w_m_sq = (omega * link.m12) ** 2
    zs = -1j * r1.reactance(omega) + math.sqrt(r1.r**2 + (r1.r / r2.r) * w_m_sq)
    zl = -1j * r2.reactance(omega) + math.sqrt(r2.r**2 + (r2.r / r1.r) * w_m_sq)
    return Termination(zs, zl)


def max_efficiency(link: Link, omega):
    """Available-gain ceiling under a simultaneous conjugate match at omega.

    Equals [x / (1 + sqrt(1+x^2))]^2 with x = w*m12/sqrt(r1*r2); for
    identical loops this is the familiar [w*m12/(r + sqrt(r^2+(w*m12)^2))]^2.
    Accepts scalar or ndarray omega.
    """
    x = omega * link.m12 / math.sqrt(link.res1.r * link.res2.r)
    return x * x / (1.0 + (1.0 + x * x) ** 0.5) ** 2
