"""Hochschild cochains, the Gerstenhaber bracket and cohomology dimensions.

A cochain of arity n on V = F^dim is a sparse dict {(out, (i1, ..., in)): value}
meaning phi(e_i1, ..., e_in) has coefficient value on e_out.
Composition and bracket signs:
    phi o psi   = sum_i (-1)^((i-1)(n-1)) phi o_i psi
    [phi, psi]  = phi o psi - (-1)^((m-1)(n-1)) psi o phi
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .algebra import Algebra
from .cyclo import DEFAULT_ORDER, CycloScalar
from .linalg import Echelon, _to_field, mat_rank, solve_linear

MAX_ARITY = 4


class ArityError(ValueError):
    pass


def _sign(e: int) -> int:
    return -1 if e % 2 else 1


@dataclass(eq=False)
class Cochain:
    arity: int
    dim: int
    terms: dict = field(default_factory=dict)
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        clean = {}
        for (out, ins), v in self.terms.items():
            ins = tuple(ins)
            if len(ins) != self.arity:
                raise ValueError("cochain term has the wrong arity")
            v = CycloScalar.coerce(v, self.order)
            if v:
                clean[(out, ins)] = v
        self.terms = clean

    @classmethod
    def from_algebra(cls, A: Algebra) -> Cochain:
        return cls(2, A.dim, {(k, (i, j)): v for (i, j, k), v in A.c.items()}, A.order)

    @classmethod
    def from_psi(cls, text: str, dim: int, params: dict | None = None, order: int = DEFAULT_ORDER) -> Cochain:
        from .algebra import parse_structure

        return cls.from_algebra(parse_structure(text, dim, params, order))

    @classmethod
    def zero(cls, arity: int, dim: int, order: int = DEFAULT_ORDER) -> Cochain:
        return cls(arity, dim, {}, order)

    @classmethod
    def from_vector(cls, vec: dict, arity: int, dim: int, order: int = DEFAULT_ORDER) -> Cochain:
        return cls(arity, dim, {decode(idx, arity, dim): v for idx, v in vec.items()}, order)

    def to_algebra(self, name: str | None = None) -> Algebra:
        if self.arity != 2:
            raise ValueError("only arity-2 cochains are products")
        return Algebra(self.dim, {(i, j, k): v for (k, (i, j)), v in self.terms.items()}, name, self.order)

    def to_vector(self) -> dict:
        return {encode(out, ins, self.dim): v for (out, ins), v in self.terms.items()}

    def is_zero(self) -> bool:
        return not self.terms

    def _combine(self, other: Cochain, s) -> Cochain:
        if (self.arity, self.dim) != (other.arity, other.dim):
            raise ValueError("cochains of different shape")
        out = dict(self.terms)
        for key, v in other.terms.items():
            nv = out.get(key, 0) + s * v
            if nv:
                out[key] = nv
            else:
                out.pop(key, None)
        return Cochain(self.arity, self.dim, out, self.order)

    def __add__(self, other: Cochain) -> Cochain:
        return self._combine(other, 1)

    def __sub__(self, other: Cochain) -> Cochain:
        return self._combine(other, -1)

    def __neg__(self) -> Cochain:
        return self.scale(-1)

    def scale(self, a) -> Cochain:
        return Cochain(self.arity, self.dim, {k: v * a for k, v in self.terms.items()}, self.order)

    def __eq__(self, other):
        return (isinstance(other, Cochain) and self.arity == other.arity
                and self.dim == other.dim and self.terms == other.terms)

    def __repr__(self):
        return f"Cochain(arity={self.arity}, dim={self.dim}, terms={len(self.terms)})"


def encode(out: int, ins: tuple, dim: int) -> int:
    idx = out
    for a in ins:
        idx = idx * dim + a
    return idx


def decode(idx: int, arity: int, dim: int) -> tuple[int, tuple]:
    ins = []
    for _ in range(arity):
        idx, a = divmod(idx, dim)
        ins.append(a)
    return idx, tuple(reversed(ins))


def compose(phi: Cochain, psi: Cochain) -> Cochain:
    """Signed composition phi o psi."""
    m, n = phi.arity, psi.arity
    ar = m + n - 1
    if ar < 0:
        return Cochain(0, phi.dim, {}, phi.order)
    by_out: dict[int, list] = {}
    for (l, ins), v in psi.terms.items():
        by_out.setdefault(l, []).append((ins, v))
    out: dict = {}
    for (k, a), u in phi.terms.items():
        for i in range(m):
            s = _sign(i * (n - 1))
            for ins, v in by_out.get(a[i], ()):
                key = (k, a[:i] + ins + a[i + 1:])
                val = u * v if s > 0 else -(u * v)
                nv = out.get(key, 0) + val
                if nv:
                    out[key] = nv
                else:
                    out.pop(key, None)
    return Cochain(ar, phi.dim, out, phi.order)


def gbracket(phi: Cochain, psi: Cochain, max_arity: int = MAX_ARITY) -> Cochain:
    m, n = phi.arity, psi.arity
    if phi.dim != psi.dim:
        raise ValueError("cochains on different spaces")
    if m + n - 1 > max_arity:
        raise ArityError(f"bracket arity {m + n - 1} exceeds the configured maximum {max_arity}")
    left = compose(phi, psi)
    right = compose(psi, phi)
    if m + n - 1 < 0:
        return left
    return left - right if _sign((m - 1) * (n - 1)) > 0 else left + right


def differential(A: Algebra, phi: Cochain, max_arity: int = MAX_ARITY) -> Cochain:
    return gbracket(Cochain.from_algebra(A), phi, max_arity)


def basis_cochain(idx: int, arity: int, dim: int, order: int = DEFAULT_ORDER) -> Cochain:
    return Cochain(arity, dim, {decode(idx, arity, dim): 1}, order)


@lru_cache(maxsize=128)
def _differential_columns(A: Algebra, n: int, max_arity: int) -> tuple[dict, ...]:
    if n + 1 > max_arity:
        raise ArityError(f"differential on C^{n} needs arity {n + 1} > {max_arity}")
    d = Cochain.from_algebra(A)
    size = A.dim ** (n + 1)
    return tuple(gbracket(d, basis_cochain(idx, n, A.dim, A.order), max_arity).to_vector() for idx in range(size))


def differential_matrix(A: Algebra, n: int, max_arity: int = MAX_ARITY):
    """D_n : C^n -> C^{n+1} as an ExactMatrix (rows index C^{n+1})."""
    from .linalg import ExactMatrix

    cols = _differential_columns(A, n, max_arity)
    nrows = A.dim ** (n + 2)
    zero = CycloScalar((), A.order)
    rows = [[zero] * len(cols) for _ in range(nrows)]
    for j, col in enumerate(cols):
        for i, v in col.items():
            rows[i][j] = v
    return ExactMatrix(rows, A.order)


def _rational_differential_columns(A: Algebra, n: int) -> list[dict]:
    """D_n on basis cochains with Fraction entries; same signs as gbracket(d, phi).

    [d, phi] = d o_1 phi + s d o_2 phi - s sum_i (-1)^(i-1) phi o_i d with s = (-1)^(n-1).
    """
    dim = A.dim
    c = {key: v.to_fraction() for key, v in A.c.items()}
    right: dict[int, list] = {}  # k -> [(y, l, c_ky^l)]
    left: dict[int, list] = {}   # k -> [(y, l, c_yk^l)]
    by_out: dict[int, list] = {}  # a -> [(u, v, c_uv^a)]
    for (i, j, k), v in c.items():
        right.setdefault(i, []).append((j, k, v))
        left.setdefault(j, []).append((i, k, v))
        by_out.setdefault(k, []).append((i, j, v))
    s = _sign(n - 1)
    cols = []
    for idx in range(dim ** (n + 1)):
        k, a = decode(idx, n, dim)
        col: dict[int, Fraction] = {}

        def put(out, ins, val):
            key = encode(out, ins, dim)
            nv = col.get(key, 0) + val
            if nv:
                col[key] = nv
            else:
                col.pop(key, None)

        for y, l, v in right.get(k, ()):
            put(l, a + (y,), v)
        for y, l, v in left.get(k, ()):
            put(l, (y,) + a, s * v)
        for i in range(n):
            for u, w, v in by_out.get(a[i], ()):
                put(k, a[:i] + (u, w) + a[i + 1:], -s * _sign(i) * v)
        cols.append(col)
    return cols


@lru_cache(maxsize=256)
def differential_rank(A: Algebra, n: int, max_arity: int = MAX_ARITY) -> int:
    if n < 0 or A.dim == 0:
        return 0
    if n + 1 > max_arity:
        raise ArityError(f"differential on C^{n} needs arity {n + 1} > {max_arity}")
    # rank of the column set equals the matrix rank
    if A.is_rational():
        return mat_rank(_rational_differential_columns(A, n), A.order)
    return mat_rank(_differential_columns(A, n, max_arity), A.order)


@dataclass(frozen=True)
class CohomologyProfile:
    dims: tuple[int, ...]

    def __iter__(self):
        return iter(self.dims)

    def __getitem__(self, i):
        return self.dims[i]

    def __len__(self):
        return len(self.dims)


def cohomology_dims(A: Algebra, nmax: int = 3, max_arity: int = MAX_ARITY) -> CohomologyProfile:
    ranks = [differential_rank(A, n, max_arity) for n in range(nmax + 1)]
    dims = []
    for n in range(nmax + 1):
        prev = ranks[n - 1] if n > 0 else 0
        dims.append(A.dim ** (n + 1) - ranks[n] - prev)
    return CohomologyProfile(tuple(dims))


def is_cocycle(A: Algebra, phi: Cochain, max_arity: int = MAX_ARITY) -> bool:
    return differential(A, phi, max_arity).is_zero()


def coboundary_columns(A: Algebra, n: int, max_arity: int = MAX_ARITY) -> tuple[dict, ...]:
    """Spanning set of B^n = image of D_{n-1}."""
    if n == 0:
        return ()
    return _differential_columns(A, n - 1, max_arity)


def is_coboundary(A: Algebra, phi: Cochain, max_arity: int = MAX_ARITY) -> bool:
    if phi.is_zero():
        return True
    cols = coboundary_columns(A, phi.arity, max_arity)
    if not cols:
        return False
    # solve sum_j x_j col_j = phi: one equation per coordinate of C^n
    target = phi.to_vector()
    eqs: dict[int, dict] = {}
    for j, col in enumerate(cols):
        for i, v in col.items():
            eqs.setdefault(i, {})[j] = v
    coords = sorted(set(eqs) | set(target))
    rows = [eqs.get(i, {}) for i in coords]
    rhs = [target.get(i, 0) for i in coords]
    return solve_linear(rows, rhs, len(cols), A.order) is not None


def represents_basis(A: Algebra, cochains, n: int | None = None, max_arity: int = MAX_ARITY) -> bool:
    """True iff the cocycles give a basis of H^n."""
    cochains = list(cochains)
    if n is None:
        if not cochains:
            raise ValueError("degree needed for an empty family")
        n = cochains[0].arity
    for phi in cochains:
        if phi.arity != n:
            raise ValueError("cochains of mixed arity")
        if not is_cocycle(A, phi, max_arity):
            raise ValueError("input contains a non-cocycle")
    h = cohomology_dims(A, n, max_arity if n + 1 <= max_arity else n + 1)[n]
    if len(cochains) != h:
        return False
    base = list(coboundary_columns(A, n, max_arity))
    rows, _ = _to_field(base + [phi.to_vector() for phi in cochains], A.order)
    ech = Echelon()
    for r in rows[:len(base)]:
        ech.add(r)
    start = ech.rank
    for r in rows[len(base):]:
        ech.add(r)
    return ech.rank - start == len(cochains)


def all_inputs(arity: int, dim: int):
    return product(range(dim), repeat=arity)
