"""Capacitive L-section synthesis and its varactor-stack realization.

An L-section here is a series capacitor toward the 50-ohm reference and a
shunt capacitor across the loop-feed port (the orientation is stored, so
the mirrored arrangement is representable).  Tunable networks realize both
capacitors as parallel banks of anti-series varactor pairs: each anti-series
pair contributes half of one diode's capacitance, pairs in parallel add.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from . import twoport
from .errors import BiasRangeError, UnmatchableError, UntunableError
from .solvers import bisect_root

# Self-check threshold for synthesized networks (relative impedance error).
_SYNTH_RTOL = 1e-9


@dataclass(frozen=True)
class LSection:
    """Two-capacitor matching section.

    shunt_at records which port the shunt capacitor faces: "network" puts it
    on the loop-feed side (series capacitor toward the reference port),
    "reference" mirrors the section.
    """

    c_series: float
    c_shunt: float
    shunt_at: Literal["network", "reference"] = "network"

    def __post_init__(self):
        if not (self.c_series > 0.0 and math.isfinite(self.c_series)):
            raise ValueError(f"series capacitance must be positive, got {self.c_series!r}")
        if not (self.c_shunt > 0.0 and math.isfinite(self.c_shunt)):
            raise ValueError(f"shunt capacitance must be positive, got {self.c_shunt!r}")
        if self.shunt_at not in ("network", "reference"):
            raise ValueError(f"unknown orientation {self.shunt_at!r}")


@dataclass(frozen=True)
class VaractorDiode:
    """C-V law constants of one diode.

    c_j0 junction capacitance at zero bias, v_j built-in junction voltage,
    grading the C-V exponent (the diode grading coefficient, unrelated to
    the loops' mutual inductance), c_pkg package capacitance, b_v breakdown
    voltage, v_r_max operational reverse-bias ceiling.
    """

    c_j0: float
    v_j: float
    grading: float
    c_pkg: float
    b_v: float
    v_r_max: float

    def __post_init__(self):
        if self.c_j0 <= 0.0 or self.v_j <= 0.0:
            raise ValueError("c_j0 and v_j must be positive")
        if not (0.0 < self.grading < 1.0):
            raise ValueError(f"grading coefficient must lie in (0, 1), got {self.grading!r}")
        if self.c_pkg < 0.0:
            raise ValueError("package capacitance must be non-negative")
        if not (self.b_v > self.v_r_max > 0.0):
            raise ValueError("need b_v > v_r_max > 0")


@dataclass(frozen=True)
class VaractorStack:
    """n_pairs anti-series varactor pairs connected in parallel."""

    diode: VaractorDiode
    n_pairs: int

    def __post_init__(self):
        if self.n_pairs < 1:
            raise ValueError("a stack needs at least one anti-series pair")


def varactor_capacitance(d: VaractorDiode, v_r: float) -> float:
    """Diode capacitance c_j0/(1 + v_r/v_j)^grading + c_pkg at reverse bias v_r."""
    if not (0.0 <= v_r <= d.v_r_max):
        raise BiasRangeError(
            f"reverse bias {v_r!r} V outside operational range [0, {d.v_r_max}] V"
        )
    return d.c_j0 / (1.0 + v_r / d.v_j) ** d.grading + d.c_pkg


def stack_capacitance(s: VaractorStack, v_r: float) -> float:
    """Stack capacitance: each anti-series pair is half a diode, pairs add."""
    return s.n_pairs * varactor_capacitance(s.diode, v_r) / 2.0


def stack_band(s: VaractorStack) -> tuple[float, float]:
    """(min, max) capacitance achievable over the bias range."""
    return stack_capacitance(s, s.diode.v_r_max), stack_capacitance(s, 0.0)


def bias_for_capacitance(s: VaractorStack, c_target: float) -> float:
    """Reverse bias realizing c_target, solved by bisection to 1e-6 V."""
    c_min, c_max = stack_band(s)
    if not (c_min <= c_target <= c_max):
        raise UntunableError(
            f"target {c_target:.4e} F outside achievable band "
            f"[{c_min:.4e}, {c_max:.4e}] F",
            c_target=c_target,
            band=(c_min, c_max),
        )
    if c_target == c_max:
        return 0.0
    if c_target == c_min:
        return s.diode.v_r_max
    return bisect_root(
        lambda v: stack_capacitance(s, v) - c_target,
        0.0,
        s.diode.v_r_max,
        abs_tol=1e-6,
    )


def lsection_abcd(ls: LSection, omega: float) -> twoport.TwoPortABCD:
    """ABCD matrix with port 1 at the reference side, port 2 at the network side."""
    series = twoport.series_abcd(1.0 / (1j * omega * ls.c_series))
    shunt = twoport.shunt_abcd(1j * omega * ls.c_shunt)
    if ls.shunt_at == "network":
        return twoport.cascade(series, shunt)
    return twoport.cascade(shunt, series)


def presented_impedance(ls: LSection, z_ref: float, omega: float) -> complex:
    """Impedance shown at the network port with z_ref closing the reference port."""
    m = twoport.flip(lsection_abcd(ls, omega))
    return twoport.input_impedance_of(m, z_ref)


def synthesize_lsection(z_present: complex, z_ref: float, omega: float) -> LSection:
    """Capacitor values presenting z_present at the network port.

    With y = 1/z_present = g + jb, the series branch toward z_ref must carry
    the full conductance: g = z_ref/(z_ref^2 + x_s^2) fixes the series
    reactance x_s, and the shunt capacitor supplies whatever susceptance the
    series branch leaves over.  Both elements must come out capacitive;
    targets violating that raise UnmatchableError (these are the impedances
    outside a capacitive L-section's reach, e.g. close-in loop spacings).
    """
    if z_ref <= 0.0:
        raise ValueError(f"reference impedance must be positive, got {z_ref!r}")
    if omega <= 0.0:
        raise ValueError("omega must be positive")
    y = 1.0 / z_present
    g_t, b_t = y.real, y.imag
    if g_t <= 0.0:
        raise UnmatchableError(
            f"target {z_present!r} has non-positive conductance", z_target=z_present
        )
    x_s_sq = z_ref / g_t - z_ref * z_ref
    if x_s_sq <= 0.0:
        raise UnmatchableError(
            f"target conductance {g_t:.4e} S not below 1/z_ref; "
            f"{z_present!r} is outside the capacitive L-section region",
            z_target=z_present,
        )
    x_s = math.sqrt(x_s_sq)
    b_shunt = b_t - x_s / (z_ref * z_ref + x_s_sq)
    if b_shunt <= 0.0:
        raise UnmatchableError(
            f"target {z_present!r} needs a non-capacitive shunt element",
            z_target=z_present,
        )
    ls = LSection(1.0 / (omega * x_s), b_shunt / omega)
    achieved = presented_impedance(ls, z_ref, omega)
    if abs(achieved - z_present) > _SYNTH_RTOL * abs(z_present):
        raise UnmatchableError(
            f"synthesis self-check failed: wanted {z_present!r}, got {achieved!r}",
            z_target=z_present,
        )
    return ls


@dataclass(frozen=True)
class PowerCheck:
    ok: bool
    margin_v: float


def power_limit_check(s: VaractorStack, v_r: float, v_rf_peak: float) -> PowerCheck:
    """Bias headroom check: passes iff v_r + v_rf_peak < b_v."""
    if v_rf_peak < 0.0:
        raise ValueError("RF peak voltage must be non-negative")
    margin = s.diode.b_v - v_r - v_rf_peak
    return PowerCheck(margin > 0.0, margin)


@dataclass(frozen=True)
class VaractorNetwork:
    """L-section whose capacitors are varactor stacks under independent bias."""

    series_stack: VaractorStack
    shunt_stack: VaractorStack
    shunt_at: Literal["network", "reference"] = "network"

    def lsection(self, v_series: float, v_shunt: float) -> LSection:
        """Fixed L-section realized at the given stack biases."""
        return LSection(
            stack_capacitance(self.series_stack, v_series),
            stack_capacitance(self.shunt_stack, v_shunt),
            self.shunt_at,
        )

    def biases_for(self, ls: LSection) -> tuple[float, float]:
        """(v_series, v_shunt) realizing the capacitances of ls."""
        return (
            bias_for_capacitance(self.series_stack, ls.c_series),
            bias_for_capacitance(self.shunt_stack, ls.c_shunt),
        )
