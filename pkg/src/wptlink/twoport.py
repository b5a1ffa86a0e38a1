"""Two-port network algebra at a single frequency.

Matrices are plain complex values evaluated at one angular frequency; a
sweep is a sequence of evaluations.  Cascading is matrix multiplication,
and the transmission/impedance/scattering conversions follow the standard
identities for reciprocal networks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConversionError, SingularNetworkError
from .link_model import Resonator


@dataclass(frozen=True)
class TwoPortABCD:
    """Transmission matrix [[a, b], [c, d]]; b in ohms, c in siemens."""

    a: complex
    b: complex
    c: complex
    d: complex

    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "TwoPortABCD") -> "TwoPortABCD":
        return cascade(self, other)


@dataclass(frozen=True)
class ImpedanceMatrix:
    z11: complex
    z12: complex
    z21: complex
    z22: complex


@dataclass(frozen=True)
class ScatterMatrix:
    s11: complex
    s12: complex
    s21: complex
    s22: complex
    z_ref: float


IDENTITY = TwoPortABCD(1.0 + 0j, 0j, 0j, 1.0 + 0j)


def tline_abcd(z0: float, beta: float, length: float) -> TwoPortABCD:
    """Lossless line section: [[cos bl, j z0 sin bl], [j sin bl / z0, cos bl]]."""
    if z0 <= 0.0:
        raise ValueError(f"characteristic impedance must be positive, got {z0!r}")
    if length < 0.0:
        raise ValueError(f"line length must be non-negative, got {length!r}")
    bl = beta * length
    cos_bl = math.cos(bl)
    sin_bl = math.sin(bl)
    return TwoPortABCD(cos_bl, 1j * z0 * sin_bl, 1j * sin_bl / z0, cos_bl)


def series_abcd(z: complex) -> TwoPortABCD:
    """Series impedance element: [[1, z], [0, 1]]."""
    return TwoPortABCD(1.0 + 0j, z, 0j, 1.0 + 0j)


def shunt_abcd(y: complex) -> TwoPortABCD:
    """Shunt admittance element: [[1, 0], [y, 1]]."""
    return TwoPortABCD(1.0 + 0j, 0j, y, 1.0 + 0j)


def tnetwork_abcd(z1: complex, z2: complex, z3: complex) -> TwoPortABCD:
    """T-network with series arms z1, z2 and shunt leg z3.

    z3 = 0 has no T representation; callers must special-case that branch.
    """
    if z3 == 0:
        raise SingularNetworkError("T-network shunt leg is zero (no representation)")
    return TwoPortABCD(
        1.0 + z1 / z3,
        z1 + z2 + z1 * z2 / z3,
        1.0 / z3,
        1.0 + z2 / z3,
    )


def coupled_loop_branches(
    res1: Resonator, res2: Resonator, m12: float, omega: float
) -> tuple[complex, complex, complex]:
    """T-equivalent branches of two coupled loops: (z1, z2, z3).

    z1 = r1 + 1/(j w c1) + j w (l1 - m12), z2 likewise for loop 2, and
    z3 = j w m12.  m12 = 0 yields z3 = 0, which tnetwork_abcd rejects.
    """
    if omega <= 0.0:
        raise ValueError("omega must be positive")
    z1 = res1.r + 1.0 / (1j * omega * res1.c) + 1j * omega * (res1.l - m12)
    z2 = res2.r + 1.0 / (1j * omega * res2.c) + 1j * omega * (res2.l - m12)
    z3 = 1j * omega * m12
    return z1, z2, z3


def cascade(left: TwoPortABCD, right: TwoPortABCD) -> TwoPortABCD:
    """Matrix product left @ right; operands must share the frequency."""
    return TwoPortABCD(
        left.a * right.a + left.b * right.c,
        left.a * right.b + left.b * right.d,
        left.c * right.a + left.d * right.c,
        left.c * right.b + left.d * right.d,
    )


def flip(m: TwoPortABCD) -> TwoPortABCD:
    """Port-swapped matrix of a reciprocal (det = 1) two-port."""
    return TwoPortABCD(m.d, m.b, m.c, m.a)


def abcd_to_z(m: TwoPortABCD) -> ImpedanceMatrix:
    if m.c == 0:
        raise ConversionError("c = 0: network has no impedance representation")
    det = m.det()
    return ImpedanceMatrix(m.a / m.c, det / m.c, 1.0 / m.c, m.d / m.c)


def z_to_abcd(z: ImpedanceMatrix) -> TwoPortABCD:
    if z.z21 == 0:
        raise ConversionError("z21 = 0: network has no transmission representation")
    det = z.z11 * z.z22 - z.z12 * z.z21
    return TwoPortABCD(z.z11 / z.z21, det / z.z21, 1.0 / z.z21, z.z22 / z.z21)


def abcd_to_s(m: TwoPortABCD, z_ref: float) -> ScatterMatrix:
    if z_ref <= 0.0:
        raise ValueError(f"reference impedance must be positive, got {z_ref!r}")
    b_n = m.b / z_ref
    c_n = m.c * z_ref
    denom = m.a + b_n + c_n + m.d
    if denom == 0:
        raise ConversionError("singular scattering conversion (a + b/z0 + c*z0 + d = 0)")
    return ScatterMatrix(
        (m.a + b_n - c_n - m.d) / denom,
        2.0 * m.det() / denom,
        2.0 / denom,
        (-m.a + b_n - c_n + m.d) / denom,
        z_ref,
    )


def s_to_abcd(s: ScatterMatrix) -> TwoPortABCD:
    if s.s21 == 0:
        raise ConversionError("s21 = 0: network has no transmission representation")
    z0 = s.z_ref
    half = 2.0 * s.s21
    return TwoPortABCD(
        ((1.0 + s.s11) * (1.0 - s.s22) + s.s12 * s.s21) / half,
        z0 * ((1.0 + s.s11) * (1.0 + s.s22) - s.s12 * s.s21) / half,
        ((1.0 - s.s11) * (1.0 - s.s22) - s.s12 * s.s21) / (half * z0),
        ((1.0 - s.s11) * (1.0 + s.s22) + s.s12 * s.s21) / half,
    )


def input_impedance_of(m: TwoPortABCD, z_load: complex) -> complex:
    """Port-1 impedance with port 2 terminated in z_load: (a zL + b)/(c zL + d)."""
    denom = m.c * z_load + m.d
    if denom == 0:
        raise ConversionError("terminated network has a singular input impedance")
    return (m.a * z_load + m.b) / denom
