"""Scalar root-finding and 1-D maximization kernels.

Bisection is used wherever a guaranteed sign-change bracket exists; golden
section search handles smooth unimodal maxima where derivatives are not
available.  Both are unconditionally convergent on their preconditions.
"""

from __future__ import annotations

import math
from typing import Callable

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def bisect_root(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    rel_tol: float = 0.0,
    abs_tol: float = 0.0,
    max_iter: int = 200,
) -> float:
    """Root of f on [a, b] by bisection; f(a) and f(b) must differ in sign.

    Terminates when the bracket width drops below abs_tol + rel_tol*|mid|.
    """
    if not (a < b):
        raise ValueError(f"invalid bracket [{a!r}, {b!r}]")
    if rel_tol <= 0.0 and abs_tol <= 0.0:
        raise ValueError("need a positive rel_tol or abs_tol")
    fa = f(a)
    if fa == 0.0:
        return a
    fb = f(b)
    if fb == 0.0:
        return b
    if (fa > 0.0) == (fb > 0.0):
        raise ValueError(f"no sign change on [{a!r}, {b!r}]")
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        if (b - a) <= abs_tol + rel_tol * abs(mid):
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (fa > 0.0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def golden_section_max(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    xtol: float,
) -> tuple[float, float]:
    """(x, f(x)) maximizing a unimodal f on [a, b], located to within xtol."""
    if not (a < b):
        raise ValueError(f"invalid bracket [{a!r}, {b!r}]")
    h = b - a
    if h <= xtol:
        x = 0.5 * (a + b)
        return x, f(x)
    n = int(math.ceil(math.log(xtol / h) / math.log(_INV_PHI)))
    c = a + _INV_PHI_SQ * h
    d = a + _INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(max(n - 1, 0)):
        if yc > yd:
            b, d, yd = d, c, yc
            h = _INV_PHI * h
            c = a + _INV_PHI_SQ * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h = _INV_PHI * h
            d = a + _INV_PHI * h
            yd = f(d)
    return (c, yc) if yc > yd else (d, yd)
