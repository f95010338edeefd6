"""Recover small-height elements of Q(zeta_N) from floating-point values.

Only used by the numeric search layers; every recovered value is checked
exactly downstream before it is trusted.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .cyclo import CycloScalar, _squarefree_root

MAX_DEN = 24
MAX_NUM = 240
TOL = 1e-7


def _near_fraction(x: float, max_den: int, tol: float) -> Fraction | None:
    if not math.isfinite(x) or abs(x) > 1e6:
        return None
    f = Fraction(x).limit_denominator(max_den)
    if abs(f.numerator) <= MAX_NUM and abs(float(f) - x) <= tol:
        return f
    return None


@lru_cache(maxsize=None)
def _imag_directions(order: int) -> tuple[tuple[complex, CycloScalar], ...]:
    """Non-real field elements alpha; values are matched as a + b*alpha."""
    out = []
    if order % 4 == 0:
        out.append(CycloScalar.zeta(order // 4, order))  # i
    if order % 3 == 0:
        out.append(CycloScalar.zeta(order // 3, order))  # primitive cube root
    for s in (-2, -6):
        r = _squarefree_root(s, order)
        if r is not None:
            out.append(r)
    return tuple((complex(a), a) for a in out if a is not None)


@lru_cache(maxsize=None)
def _real_units(order: int) -> tuple[tuple[float, CycloScalar], ...]:
    out = [(1.0, CycloScalar.rational(1, order))]
    for s in (2, 3, 6):
        r = _squarefree_root(s, order)
        if r is not None:
            out.append((complex(r).real, r))
    return tuple(out)


def height(x: CycloScalar) -> int:
    return max((max(abs(c.numerator), c.denominator) for c in x.coeffs if c), default=0)


def recognize(z: complex, order: int = 24, max_den: int = MAX_DEN, tol: float = TOL) -> CycloScalar | None:
    """Smallest-height field element found within tol of z, or None."""
    z = complex(z)
    cands: list[CycloScalar] = []
    if abs(z.imag) <= tol * max(1.0, abs(z)):
        for val, unit in _real_units(order):
            f = _near_fraction(z.real / val, max_den, tol)
            if f is not None:
                cands.append(unit * f)
    if abs(z.real) <= tol * max(1.0, abs(z)) and order % 4 == 0:
        i_unit = CycloScalar.zeta(order // 4, order)
        for val, unit in _real_units(order):
            f = _near_fraction(z.imag / val, max_den, tol)
            if f is not None:
                cands.append(i_unit * unit * f)
    for num, alpha in _imag_directions(order):
        b = z.imag / num.imag
        a = z.real - b * num.real
        fa = _near_fraction(a, max_den, tol)
        fb = _near_fraction(b, max_den, tol)
        if fa is not None and fb is not None:
            cands.append(alpha * fb + fa)
    best = None
    for c in cands:
        if abs(complex(c) - z) > 10 * tol * max(1.0, abs(z)):
            continue
        if best is None or (height(c), c.sort_key()) < (height(best), best.sort_key()):
            best = c
    return best
