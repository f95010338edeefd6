"""Structure-constant algebras and their basic invariants.

Indices are 0-based internally; text uses 1-based ``p(i,j;k)`` meaning
e_i * e_j = e_k. Vectors are sparse dicts {coordinate: CycloScalar}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .cyclo import DEFAULT_ORDER, CycloScalar
from .expr import ExprError, parse_psi_sum
from .linalg import ExactMatrix, kernel_basis, mat_rank, rref

Vec = dict


def _axpy(out: dict, a, x: dict) -> None:
    for k, v in x.items():
        nv = out.get(k, 0) + a * v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)


@dataclass(eq=False)
class Algebra:
    dim: int
    c: dict = field(default_factory=dict)
    name: str | None = None
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        clean = {}
        for (i, j, k), v in self.c.items():
            if not (0 <= i < self.dim and 0 <= j < self.dim and 0 <= k < self.dim):
                raise ValueError(f"structure index ({i + 1},{j + 1};{k + 1}) out of range for dim {self.dim}")
            v = CycloScalar.coerce(v, self.order)
            if v:
                clean[(i, j, k)] = v
        self.c = clean
        table: dict[tuple[int, int], dict[int, CycloScalar]] = {}
        for (i, j, k), v in clean.items():
            table.setdefault((i, j), {})[k] = v
        self._table = table

    def __eq__(self, other):
        return isinstance(other, Algebra) and self.dim == other.dim and self.c == other.c

    def __hash__(self):
        return hash((self.dim, frozenset(self.c.items())))

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<Algebra{label} dim={self.dim}: {render(self) or '0'}>"

    def basis_product(self, i: int, j: int) -> dict:
        return self._table.get((i, j), {})

    def mul(self, x: Vec, y: Vec) -> Vec:
        out: dict = {}
        for i, a in x.items():
            for j, b in y.items():
                prod = self._table.get((i, j))
                if prod:
                    _axpy(out, a * b, prod)
        return out

    def is_rational(self) -> bool:
        return all(v.is_rational() for v in self.c.values())

    def with_name(self, name: str | None) -> Algebra:
        return Algebra(self.dim, self.c, name, self.order)


def unit(i: int, order: int = DEFAULT_ORDER) -> Vec:
    return {i: CycloScalar.rational(1, order)}


def parse_structure(text: str, dim: int, params: dict | None = None,
                    order: int = DEFAULT_ORDER, name: str | None = None) -> Algebra:
    psi = parse_psi_sum(text, order, params)
    c = {}
    for (i, j, k), coeff in psi.terms.items():
        if max(i, j, k) >= dim:
            raise ExprError(f"index out of range in p({i + 1},{j + 1};{k + 1}) for dim {dim}")
        if not coeff.is_constant():
            raise ExprError(f"unresolved parameter symbol(s): {', '.join(sorted(coeff.symbols()))}")
        c[(i, j, k)] = coeff.constant()
    return Algebra(dim, c, name, order)


def render(A: Algebra) -> str:
    """Canonical psi text; parse_structure(render(A), A.dim) == A."""
    parts = []
    for (i, j, k) in sorted(A.c):
        v = A.c[(i, j, k)]
        term = f"p({i + 1},{j + 1};{k + 1})"
        if v == 1:
            parts.append(("+", term))
        elif v == -1:
            parts.append(("-", term))
        elif v.is_rational():
            f = v.to_fraction()
            sign = "-" if f < 0 else "+"
            mag = abs(f)
            coef = str(mag) if mag.denominator == 1 else f"({mag})"
            parts.append((sign, f"{coef}*{term}"))
        else:
            parts.append(("+", f"({v})*{term}"))
    text = ""
    for n, (sign, term) in enumerate(parts):
        if n == 0:
            text = term if sign == "+" else f"-{term}"
        else:
            text += f" {sign} {term}"
    return text


def zero_algebra(dim: int, order: int = DEFAULT_ORDER) -> Algebra:
    return Algebra(dim, {}, None, order)


def is_associative(A: Algebra) -> tuple[bool, list[tuple[int, int, int]]]:
    """Exact check on every basis triple; returns the violating (1-based) triples."""
    bad = []
    n = A.dim
    for a, b, c in product(range(n), repeat=3):
        left = A.mul(A.basis_product(a, b), unit(c, A.order))
        right = A.mul(unit(a, A.order), A.basis_product(b, c))
        diff = dict(left)
        _axpy(diff, -1, right)
        if diff:
            bad.append((a + 1, b + 1, c + 1))
    return not bad, bad


def is_commutative(A: Algebra) -> bool:
    return all(A.c.get((j, i, k)) == v for (i, j, k), v in A.c.items())


def opposite(A: Algebra) -> Algebra:
    return Algebra(A.dim, {(j, i, k): v for (i, j, k), v in A.c.items()}, None, A.order)


def direct_sum(A: Algebra, B: Algebra) -> Algebra:
    n = A.dim
    c = dict(A.c)
    for (i, j, k), v in B.c.items():
        c[(i + n, j + n, k + n)] = v
    return Algebra(A.dim + B.dim, c, None, A.order)


def change_of_basis(A: Algebra, g: ExactMatrix) -> Algebra:
    """Transported structure d'(x, y) = g^-1 d(g x, g y)."""
    n = A.dim
    if g.shape != (n, n):
        raise ValueError("basis change has the wrong size")
    if not g.is_invertible():
        raise ValueError("basis change is singular")
    ginv = g.inverse()
    cols = [{r: g.rows[r][i] for r in range(n) if g.rows[r][i]} for i in range(n)]
    c = {}
    for i in range(n):
        for j in range(n):
            w = A.mul(cols[i], cols[j])
            if not w:
                continue
            for k in range(n):
                row = ginv.rows[k]
                s = 0
                for l, v in w.items():
                    if row[l]:
                        s = row[l] * v + s
                if s:
                    c[(i, j, k)] = s
    return Algebra(n, c, None, A.order)


class Subspace:
    """Subspace of F^n stored by its reduced row echelon basis."""

    __slots__ = ("ambient", "rows", "order")

    def __init__(self, ambient: int, vectors=(), order: int = DEFAULT_ORDER):
        self.ambient = ambient
        self.order = order
        red = rref([v for v in vectors if v], order)
        self.rows = [red[c] for c in sorted(red)]

    @classmethod
    def full(cls, n: int, order: int = DEFAULT_ORDER) -> Subspace:
        return cls(n, [unit(i, order) for i in range(n)], order)

    @classmethod
    def from_equations(cls, equations, n: int, order: int = DEFAULT_ORDER) -> Subspace:
        return cls(n, kernel_basis(equations, n, order), order)

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def basis(self) -> list[Vec]:
        return list(self.rows)

    def pivots(self) -> list[int]:
        return [min(r) for r in self.rows]

    def equations(self) -> list[Vec]:
        """Linear functionals cutting out the subspace."""
        return kernel_basis(self.rows, self.ambient, self.order)

    def contains(self, v: Vec) -> bool:
        return mat_rank(self.rows + [v], self.order) == self.dim

    def reduce(self, v: Vec) -> Vec:
        """Representative of v modulo the subspace with zero pivot coordinates."""
        out = dict(v)
        for r in self.rows:
            p = min(r)
            a = out.get(p)
            if a:
                _axpy(out, -a, r)
        return out

    def __add__(self, other: Subspace) -> Subspace:
        return Subspace(self.ambient, self.rows + other.rows, self.order)

    def __and__(self, other: Subspace) -> Subspace:
        return Subspace.from_equations(self.equations() + other.equations(), self.ambient, self.order)

    def __eq__(self, other):
        return isinstance(other, Subspace) and self.ambient == other.ambient and self.rows == other.rows

    def __le__(self, other: Subspace) -> bool:
        return all(other.contains(v) for v in self.rows)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"


def product_span(A: Algebra, U: Subspace, W: Subspace) -> Subspace:
    vecs = [A.mul(u, w) for u in U.rows for w in W.rows]
    return Subspace(A.dim, vecs, A.order)


def power_subspaces(A: Algebra) -> list[Subspace]:
    """A, A^2, A^3, ... until the chain stabilizes (last entry repeats nothing)."""
    chain = [Subspace.full(A.dim, A.order)]
    while True:
        cur = chain[-1]
        basis_vecs = [unit(i, A.order) for i in range(A.dim)]
        vecs = [A.mul(e, v) for e in basis_vecs for v in cur.rows]
        vecs += [A.mul(v, e) for e in basis_vecs for v in cur.rows]
        nxt = Subspace(A.dim, vecs, A.order)
        if nxt.dim == cur.dim:
            return chain
        chain.append(nxt)
        if nxt.dim == 0:
            return chain


@dataclass
class PowerChain:
    dims: tuple[int, ...]
    nilpotent: bool
    index: int | None


def power_subspace_dims(A: Algebra) -> PowerChain:
    chain = power_subspaces(A)
    dims = tuple(s.dim for s in chain)
    nilpotent = dims[-1] == 0
    if A.dim == 0:
        return PowerChain((0,), True, 1)
    return PowerChain(dims, nilpotent, len(dims) if nilpotent else None)


def is_nilpotent(A: Algebra) -> bool:
    return power_subspace_dims(A).nilpotent


def _annihilator_equations(A: Algebra, left: bool, right: bool) -> list[Vec]:
    n = A.dim
    eqs = []
    for i in range(n):
        for k in range(n):
            if left:
                # (m e_i)_k = sum_j m_j c_{ji}^k
                row = {j: A.c[(j, i, k)] for j in range(n) if (j, i, k) in A.c}
                if row:
                    eqs.append(row)
            if right:
                row = {j: A.c[(i, j, k)] for j in range(n) if (i, j, k) in A.c}
                if row:
                    eqs.append(row)
    return eqs


def annihilator_kernel(A: Algebra) -> Subspace:
    """Two-sided annihilator {m : mA = Am = 0}."""
    return Subspace.from_equations(_annihilator_equations(A, True, True), A.dim, A.order)


def left_annihilator(A: Algebra) -> Subspace:
    """{m : m A = 0}."""
    return Subspace.from_equations(_annihilator_equations(A, True, False), A.dim, A.order)


def right_annihilator(A: Algebra) -> Subspace:
    """{m : A m = 0}."""
    return Subspace.from_equations(_annihilator_equations(A, False, True), A.dim, A.order)


def center(A: Algebra) -> Subspace:
    n = A.dim
    eqs = []
    for i in range(n):
        for k in range(n):
            row = {}
            for j in range(n):
                v = A.c.get((j, i, k), 0) - A.c.get((i, j, k), 0)
                if v:
                    row[j] = v
            if row:
                eqs.append(row)
    return Subspace.from_equations(eqs, n, A.order)


def quotient(A: Algebra, ideal: Subspace) -> Algebra:
    """A / ideal on the complement spanned by the non-pivot coordinates."""
    keep = [i for i in range(A.dim) if i not in set(ideal.pivots())]
    pos = {old: new for new, old in enumerate(keep)}
    c = {}
    for a, i in enumerate(keep):
        for b, j in enumerate(keep):
            w = ideal.reduce(A.basis_product(i, j))
            for k, v in w.items():
                c[(a, b, pos[k])] = v
    return Algebra(len(keep), c, None, A.order)


def core_of(A: Algebra) -> Algebra:
    if not is_nilpotent(A):
        raise ValueError("core is only defined here for nilpotent algebras")
    return quotient(A, annihilator_kernel(A))


def structure_matrix(A: Algebra) -> ExactMatrix:
    """n x n^2 matrix whose column (i, j) holds the coordinates of e_i e_j."""
    n = A.dim
    rows = [[A.c.get((i, j, k), 0) for i in range(n) for j in range(n)] for k in range(n)]
    return ExactMatrix(rows, A.order)
