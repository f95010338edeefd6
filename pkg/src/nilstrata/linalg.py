"""Exact sparse elimination and small dense matrices over Q(zeta_N).

Rows are dicts mapping column index to value. When every entry is rational
the elimination runs on Fractions, which is several times faster than going
through CycloScalar; rational ranks go through sympy's sparse rref, whose
pivoting keeps coefficient growth in check on dense inputs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from sympy import QQ
from sympy.polys.matrices.sdm import SDM

from .cyclo import DEFAULT_ORDER, CycloScalar

SparseRow = dict


def _to_field(rows: Iterable[dict], order: int) -> tuple[list[dict], bool]:
    rows = [dict(r) for r in rows]
    rational = True
    for r in rows:
        for v in r.values():
            if isinstance(v, CycloScalar) and not v.is_rational():
                rational = False
                break
        if not rational:
            break
    out = []
    for r in rows:
        if rational:
            nr = {}
            for k, v in r.items():
                f = v.to_fraction() if isinstance(v, CycloScalar) else Fraction(v)
                if f:
                    nr[k] = f
        else:
            nr = {k: CycloScalar.coerce(v, order) for k, v in r.items()}
            nr = {k: v for k, v in nr.items() if v}
        out.append(nr)
    return out, rational


def _lift(v, order: int) -> CycloScalar:
    return v if isinstance(v, CycloScalar) else CycloScalar.rational(v, order)


class Echelon:
    """Incremental row echelon form; pivot of a row is its first nonzero column."""

    def __init__(self):
        self.pivots: dict[int, dict] = {}

    def reduce(self, row: dict) -> dict:
        row = dict(row)
        while True:
            hits = [c for c in row if c in self.pivots]
            if not hits:
                return row
            c = min(hits)
            factor = row[c]
            prow = self.pivots[c]
            for k, v in prow.items():
                nv = row.get(k, 0) - factor * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)

    def add(self, row: dict) -> int | None:
        """Insert row; returns the new pivot column or None if dependent."""
        row = self.reduce(row)
        if not row:
            return None
        c = min(row)
        inv = 1 / row[c]
        self.pivots[c] = {k: v * inv for k, v in row.items()}
        return c

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduced(self) -> dict[int, dict]:
        """Back-substituted copy: every pivot column is zero in the other rows."""
        cols = sorted(self.pivots, reverse=True)
        done: dict[int, dict] = {}
        for c in cols:
            row = dict(self.pivots[c])
            for k in sorted(k for k in row if k != c and k in done):
                factor = row.get(k)
                if not factor:
                    continue
                for kk, v in done[k].items():
                    nv = row.get(kk, 0) - factor * v
                    if nv:
                        row[kk] = nv
                    else:
                        row.pop(kk, None)
            done[c] = row
        return done


def _rational_rank(rows: list[dict]) -> int:
    data = {i: {k: QQ(v.numerator, v.denominator) for k, v in r.items()} for i, r in enumerate(rows) if r}
    if not data:
        return 0
    ncols = 1 + max(max(r) for r in data.values())
    return len(SDM(data, (len(rows), ncols), QQ).rref()[1])


def mat_rank(rows: Iterable[dict], order: int = DEFAULT_ORDER) -> int:
    rows, rational = _to_field(rows, order)
    if rational:
        return _rational_rank(rows)
    ech = Echelon()
    for r in rows:
        ech.add(r)
    return ech.rank


def rref(rows: Iterable[dict], order: int = DEFAULT_ORDER) -> dict[int, dict[int, CycloScalar]]:
    """Reduced row echelon form as {pivot column: row}."""
    rows, _ = _to_field(rows, order)
    ech = Echelon()
    for r in rows:
        ech.add(r)
    return {c: {k: _lift(v, order) for k, v in r.items()} for c, r in ech.reduced().items()}


def kernel_basis(rows: Iterable[dict], ncols: int, order: int = DEFAULT_ORDER) -> list[dict[int, CycloScalar]]:
    """Basis of {x : row . x = 0 for every row}; one vector per free column."""
    rows, _ = _to_field(rows, order)
    ech = Echelon()
    for r in rows:
        ech.add(r)
    red = ech.reduced()
    basis = []
    for f in range(ncols):
        if f in red:
            continue
        vec = {f: CycloScalar.rational(1, order)}
        for c, r in red.items():
            v = r.get(f)
            if v:
                vec[c] = _lift(-v, order)
        basis.append(vec)
    return basis


def solve_linear(rows: Sequence[dict], rhs: Sequence, ncols: int,
                 order: int = DEFAULT_ORDER) -> dict[int, CycloScalar] | None:
    """One solution of A x = b (free variables set to 0), or None if inconsistent."""
    aug = []
    for r, b in zip(rows, rhs):
        rr = dict(r)
        if b:
            rr[ncols] = b
        aug.append(rr)
    aug, _ = _to_field(aug, order)
    ech = Echelon()
    for r in aug:
        ech.add(r)
    if ncols in ech.pivots:
        return None
    red = ech.reduced()
    sol = {}
    for c, r in red.items():
        v = r.get(ncols)
        if v:
            sol[c] = _lift(v, order)
    return sol


def span_contains(basis_rows: Iterable[dict], vec: dict, order: int = DEFAULT_ORDER) -> bool:
    rows, _ = _to_field(list(basis_rows) + [vec], order)
    ech = Echelon()
    for r in rows[:-1]:
        ech.add(r)
    return not ech.reduce(rows[-1]) if rows else True


class ExactMatrix:
    """Dense matrix with CycloScalar entries."""

    __slots__ = ("rows", "order")

    def __init__(self, rows, order: int = DEFAULT_ORDER):
        self.order = order
        self.rows = [[CycloScalar.coerce(x, order) for x in r] for r in rows]

    @classmethod
    def from_rows(cls, rows, order: int = DEFAULT_ORDER) -> ExactMatrix:
        return cls(rows, order)

    @classmethod
    def parse(cls, text: str, order: int = DEFAULT_ORDER) -> ExactMatrix:
        """Rows separated by ';', entries by ','; entries are scalar expressions."""
        from .expr import parse_scalar

        rows = [[parse_scalar(e, order=order) for e in r.split(",")] for r in text.split(";") if r.strip()]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError(f"ragged or empty matrix: {text!r}")
        return cls(rows, order)

    @classmethod
    def identity(cls, n: int, order: int = DEFAULT_ORDER) -> ExactMatrix:
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], order)

    @classmethod
    def zeros(cls, n: int, m: int | None = None, order: int = DEFAULT_ORDER) -> ExactMatrix:
        return cls([[0] * (n if m is None else m) for _ in range(n)], order)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0]) if self.rows else 0

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def __matmul__(self, other: ExactMatrix) -> ExactMatrix:
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ValueError("shape mismatch")
        zero = CycloScalar((), self.order)
        out = [[zero] * m for _ in range(n)]
        for i in range(n):
            ri = self.rows[i]
            row = out[i]
            for t in range(k):
                a = ri[t]
                if not a:
                    continue
                ot = other.rows[t]
                for j in range(m):
                    if ot[j]:
                        row[j] = row[j] + a * ot[j]
        return ExactMatrix(out, self.order)

    def __add__(self, other: ExactMatrix) -> ExactMatrix:
        return ExactMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.order)

    def __sub__(self, other: ExactMatrix) -> ExactMatrix:
        return ExactMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.order)

    def scale(self, c) -> ExactMatrix:
        return ExactMatrix([[a * c for a in r] for r in self.rows], self.order)

    @property
    def T(self) -> ExactMatrix:
        n, m = self.shape
        return ExactMatrix([[self.rows[i][j] for i in range(n)] for j in range(m)], self.order)

    def sparse_rows(self) -> list[dict]:
        return [{j: v for j, v in enumerate(r) if v} for r in self.rows]

    def rank(self) -> int:
        return mat_rank(self.sparse_rows(), self.order)

    def det(self) -> CycloScalar:
        n, m = self.shape
        if n != m:
            raise ValueError("determinant of a non-square matrix")
        a = [list(r) for r in self.rows]
        det = CycloScalar.rational(1, self.order)
        for c in range(n):
            p = next((r for r in range(c, n) if a[r][c]), None)
            if p is None:
                return CycloScalar((), self.order)
            if p != c:
                a[c], a[p] = a[p], a[c]
                det = -det
            piv = a[c][c]
            det = det * piv
            inv = piv.inverse()
            for r in range(c + 1, n):
                if a[r][c]:
                    f = a[r][c] * inv
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return det

    def inverse(self) -> ExactMatrix:
        n, m = self.shape
        if n != m:
            raise ValueError("inverse of a non-square matrix")
        aug = [{**{j: v for j, v in enumerate(r) if v}, n + i: CycloScalar.rational(1, self.order)}
               for i, r in enumerate(self.rows)]
        red = rref(aug, self.order)
        if any(c not in red for c in range(n)):
            raise ZeroDivisionError("matrix is singular")
        zero = CycloScalar((), self.order)
        return ExactMatrix([[red[i].get(n + j, zero) for j in range(n)] for i in range(n)], self.order)

    def is_invertible(self) -> bool:
        return self.shape[0] == self.shape[1] and self.rank() == self.shape[0]

    def to_complex(self):
        import numpy as np

        return np.array([[complex(x) for x in r] for r in self.rows], dtype=complex)

    def __eq__(self, other):
        return isinstance(other, ExactMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(tuple(tuple(r) for r in self.rows))

    def text(self) -> str:
        return ";".join(",".join(str(x).replace(" ", "") for x in r) for r in self.rows)

    def __repr__(self):
        return f"ExactMatrix({self.text()!r})"
