"""Exact arithmetic in the cyclotomic field Q(zeta_N).

Elements are stored on the power basis 1, z, ..., z^(phi(N)-1) and are always
reduced modulo the N-th cyclotomic polynomial, so equality is coefficient
equality.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

DEFAULT_ORDER = 24


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    if n < 1:
        raise ValueError("cyclotomic order must be positive")
    num = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            num = _exact_divide(num, list(cyclotomic_poly(d)))
    return tuple(num)


def _exact_divide(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        out[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    assert not any(num), "non-exact polynomial division"
    return out


@lru_cache(maxsize=None)
def _reduction_table(n: int) -> tuple[tuple[int, ...], ...]:
    """Row k holds z^k reduced mod Phi_n, for k < 2*phi(n) - 1."""
    phi = cyclotomic_poly(n)
    deg = len(phi) - 1
    rows = []
    for k in range(max(2 * deg - 1, 1)):
        if k < deg:
            v = [0] * deg
            v[k] = 1
        else:
            prev = rows[k - 1]
            # multiply previous by z, then use z^deg = -sum(phi[i] z^i)
            top = prev[-1]
            v = [0] + list(prev[:-1])
            for i in range(deg):
                v[i] -= top * phi[i]
        rows.append(tuple(v))
    return tuple(rows)


def euler_phi(n: int) -> int:
    return len(cyclotomic_poly(n)) - 1


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to an exact rational")


class CycloScalar:
    """An element of Q(zeta_N)."""

    __slots__ = ("coeffs", "order", "_hash")

    def __init__(self, coeffs=(), order: int = DEFAULT_ORDER):
        deg = euler_phi(order)
        vals = [_frac(c) for c in coeffs]
        if len(vals) > deg:
            vals = _reduce(vals, order)
        vals += [Fraction(0)] * (deg - len(vals))
        self.coeffs: tuple[Fraction, ...] = tuple(vals)
        self.order = order
        self._hash = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def rational(cls, x, order: int = DEFAULT_ORDER) -> CycloScalar:
        return cls((_frac(x),), order)

    @classmethod
    def zeta(cls, k: int = 1, order: int = DEFAULT_ORDER) -> CycloScalar:
        k %= order
        v = [0] * (k + 1)
        v[k] = 1
        return cls(v, order)

    @classmethod
    def coerce(cls, x, order: int = DEFAULT_ORDER) -> CycloScalar:
        if isinstance(x, CycloScalar):
            return x
        return cls.rational(x, order)

    # -- predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def __bool__(self) -> bool:
        return not self.is_zero()

    # -- arithmetic ---------------------------------------------------------
    def _other(self, other) -> CycloScalar | None:
        if isinstance(other, CycloScalar):
            if other.order != self.order:
                raise ValueError("mixing cyclotomic fields of different order")
            return other
        if isinstance(other, (int, Rational)):
            return CycloScalar.rational(other, self.order)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return _raw(tuple(a + b for a, b in zip(self.coeffs, o.coeffs)), self.order)

    __radd__ = __add__

    def __neg__(self):
        return _raw(tuple(-a for a in self.coeffs), self.order)

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return _raw(tuple(a - b for a, b in zip(self.coeffs, o.coeffs)), self.order)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if o.is_rational():
            c = o.coeffs[0]
            return _raw(tuple(a * c for a in self.coeffs), self.order)
        if self.is_rational():
            c = self.coeffs[0]
            return _raw(tuple(c * b for b in o.coeffs), self.order)
        a, b = self.coeffs, o.coeffs
        prod = [Fraction(0)] * (2 * len(a) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        return _raw(tuple(_reduce(prod, self.order)), self.order)

    __rmul__ = __mul__

    def inverse(self) -> CycloScalar:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(zeta_N)")
        if self.is_rational():
            return CycloScalar.rational(1 / self.coeffs[0], self.order)
        # solve (multiplication-by-self) * y = 1 on the power basis
        deg = len(self.coeffs)
        cols = []
        for k in range(deg):
            cols.append((self * CycloScalar.zeta(k, self.order)).coeffs)
        mat = [[cols[c][r] for c in range(deg)] + [Fraction(int(r == 0))] for r in range(deg)]
        sol = _dense_solve(mat, deg)
        return CycloScalar(sol, self.order)

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = CycloScalar.rational(1, self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> CycloScalar:
        """Complex conjugation, z -> z^-1."""
        out = CycloScalar((), self.order)
        for k, a in enumerate(self.coeffs):
            if a:
                out = out + CycloScalar.zeta(-k, self.order) * a
        return out

    # -- comparison / hashing ----------------------------------------------
    def __eq__(self, other):
        o = self._other(other) if not isinstance(other, CycloScalar) else other
        if o is None:
            return NotImplemented
        return self.order == o.order and self.coeffs == o.coeffs

    def __hash__(self):
        if self._hash is None:
            if self.is_rational():
                self._hash = hash(self.coeffs[0])
            else:
                self._hash = hash((self.order, self.coeffs))
        return self._hash

    def sort_key(self) -> tuple[Fraction, ...]:
        return self.coeffs

    # -- numerics / display -------------------------------------------------
    def __complex__(self) -> complex:
        w = cmath.exp(2j * math.pi / self.order)
        return sum((float(a) * w**k for k, a in enumerate(self.coeffs) if a), 0j)

    def __repr__(self) -> str:
        return f"CycloScalar({str(self)!r}, order={self.order})"

    def __str__(self) -> str:
        terms = []
        for k, a in enumerate(self.coeffs):
            if not a:
                continue
            mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            if not mono:
                terms.append(str(a))
            elif a == 1:
                terms.append(mono)
            elif a == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{a}*{mono}")
        if not terms:
            return "0"
        text = terms[0]
        for t in terms[1:]:
            text += " - " + t[1:] if t.startswith("-") else " + " + t
        return text

    def sqrt(self) -> CycloScalar | None:
        """A square root inside the field, or None when there is none we can find."""
        if self.is_zero():
            return self
        if self.is_rational():
            return _rational_sqrt(self.coeffs[0], self.order)
        from .recognize import recognize

        approx = complex(self) ** 0.5
        for cand in (approx, -approx):
            val = recognize(cand, self.order)
            if val is not None and val * val == self:
                return val
        return None


def _raw(coeffs: tuple[Fraction, ...], order: int) -> CycloScalar:
    obj = CycloScalar.__new__(CycloScalar)
    obj.coeffs = coeffs
    obj.order = order
    obj._hash = None
    return obj


def _reduce(vals: list[Fraction], order: int) -> list[Fraction]:
    table = _reduction_table(order)
    deg = euler_phi(order)
    out = [Fraction(0)] * deg
    for k, a in enumerate(vals):
        if not a:
            continue
        if k < deg:
            out[k] += a
            continue
        if k >= len(table):
            # only reachable for over-long explicit coefficient lists
            k_red = k % order
            if k_red < deg:
                out[k_red] += a
                continue
            row = _reduction_table_row(order, k_red)
        else:
            row = table[k]
        for i, r in enumerate(row):
            if r:
                out[i] += a * r
    return out


@lru_cache(maxsize=None)
def _reduction_table_row(order: int, k: int) -> tuple[int, ...]:
    table = _reduction_table(order)
    if k < len(table):
        return table[k]
    phi = cyclotomic_poly(order)
    deg = len(phi) - 1
    prev = _reduction_table_row(order, k - 1)
    top = prev[-1]
    v = [0] + list(prev[:-1])
    for i in range(deg):
        v[i] -= top * phi[i]
    return tuple(v)


def _dense_solve(aug: list[list[Fraction]], n: int) -> list[Fraction]:
    rows = len(aug)
    r = 0
    piv_cols = []
    for c in range(n):
        p = next((i for i in range(r, rows) if aug[i][c]), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
    sol = [Fraction(0)] * n
    for i, c in enumerate(piv_cols):
        sol[c] = aug[i][n]
    return sol


@lru_cache(maxsize=None)
def _squarefree_root(s: int, order: int) -> CycloScalar | None:
    """sqrt(s) for small squarefree s, when it lies in Q(zeta_order)."""
    i_unit = CycloScalar.zeta(order // 4, order) if order % 4 == 0 else None
    sqrt2 = None
    if order % 8 == 0:
        z8 = CycloScalar.zeta(order // 8, order)
        sqrt2 = z8 + z8.conjugate()
    sqrt3 = None
    if order % 12 == 0:
        z12 = CycloScalar.zeta(order // 12, order)
        sqrt3 = z12 + z12.conjugate()
    sqrtm3 = None
    if order % 3 == 0:
        w = CycloScalar.zeta(order // 3, order)
        sqrtm3 = 2 * w + 1
    table = {
        1: CycloScalar.rational(1, order),
        -1: i_unit,
        2: sqrt2,
        -2: sqrt2 * i_unit if sqrt2 is not None and i_unit is not None else None,
        3: sqrt3,
        -3: sqrtm3,
        6: sqrt2 * sqrt3 if sqrt2 is not None and sqrt3 is not None else None,
        -6: sqrt2 * sqrtm3 if sqrt2 is not None and sqrtm3 is not None else None,
    }
    root = table.get(s)
    if root is not None:
        assert root * root == s
    return root


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = s * m^2 with s squarefree (sign kept in s)."""
    sign = -1 if n < 0 else 1
    n = abs(n)
    m = 1
    s = 1
    p = 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            m *= p
        if n % p == 0:
            n //= p
            s *= p
        p += 1
    s *= n
    return sign * s, m


def _rational_sqrt(x: Fraction, order: int) -> CycloScalar | None:
    num = x.numerator * x.denominator
    s, m = _squarefree_split(num)
    root = _squarefree_root(s, order)
    if root is None:
        return None
    return root * Fraction(m, x.denominator)


def zero(order: int = DEFAULT_ORDER) -> CycloScalar:
    return CycloScalar((), order)


def one(order: int = DEFAULT_ORDER) -> CycloScalar:
    return CycloScalar.rational(1, order)


def cyclo_eval(expr: str, order: int = DEFAULT_ORDER) -> CycloScalar:
    """Evaluate a scalar expression in integers, + - * / ^, parentheses and z."""
    from .expr import parse_scalar

    return parse_scalar(expr, order=order)
