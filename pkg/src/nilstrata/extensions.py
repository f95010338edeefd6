"""Extensions 0 -> M -> V -> W -> 0 of an algebra on W by an ideal M.

V = M + W with the M coordinates first. A structure on V splits as
d = delta + mu + lam + psi where delta lives on W, mu on M,
lam in C^{1,1} (one M and one W input, output in M) and psi in C^{0,2}
(two W inputs, output in M). Associativity of d is equivalent to

    compatibility   [mu, lam] = 0
    Maurer-Cartan   [delta, lam] + 1/2 [lam, lam] + [mu, psi] = 0
    cocycle         [delta + lam, psi] = 0

given that delta and mu are associative.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product

from .algebra import Algebra, is_associative, is_nilpotent, render, zero_algebra
from .bilinear import form3, form_B, form_C
from .cyclo import DEFAULT_ORDER, CycloScalar, cyclo_eval
from .hochschild import Cochain, gbracket
from .isomorphism import are_isomorphic, fingerprint
from .linalg import ExactMatrix, Echelon, _to_field, kernel_basis, solve_linear

log = logging.getLogger(__name__)

HALF = Fraction(1, 2)


class ShapeError(ValueError):
    pass


@dataclass
class ExtensionProblem:
    delta: Algebra
    mu: Algebra

    def __post_init__(self):
        for name, alg in (("delta", self.delta), ("mu", self.mu)):
            ok, bad = is_associative(alg)
            if not ok:
                raise ValueError(f"{name} is not associative at {bad[0]}")

    @property
    def m(self) -> int:
        return self.mu.dim

    @property
    def w(self) -> int:
        return self.delta.dim

    @property
    def dim(self) -> int:
        return self.m + self.w

    @property
    def order(self) -> int:
        return self.mu.order

    def in_m(self, i: int) -> bool:
        return i < self.m

    def delta_cochain(self) -> Cochain:
        s = self.m
        return Cochain(2, self.dim, {(k + s, (i + s, j + s)): v for (i, j, k), v in self.delta.c.items()},
                       self.order)

    def mu_cochain(self) -> Cochain:
        return Cochain(2, self.dim, {(k, (i, j)): v for (i, j, k), v in self.mu.c.items()}, self.order)

    def bigraded_basis(self, k: int, l: int) -> list[Cochain]:
        return [BigradedCochain.unit(self, k, l, out, ins).cochain for out, ins in bigraded_slots(self, k, l)]


def bigraded_slots(problem: ExtensionProblem, k: int, l: int) -> list[tuple[int, tuple]]:
    """(output, inputs) for maps T^{k,l} -> M: k inputs from M and l from W, in every order."""
    mi = range(problem.m)
    wi = range(problem.m, problem.dim)
    slots = []
    for pattern in sorted(set(permutations("m" * k + "w" * l))):
        for ins in product(*[mi if c == "m" else wi for c in pattern]):
            for out in mi:
                slots.append((out, tuple(ins)))
    return sorted(slots, key=lambda s: (s[1], s[0]))


def bidegree_of(problem: ExtensionProblem, out: int, ins: tuple) -> tuple[int, int] | None:
    """(k, l) for a term with output in M, None when the output lies in W."""
    if not problem.in_m(out):
        return None
    k = sum(1 for i in ins if problem.in_m(i))
    return k, len(ins) - k


@dataclass(eq=False)
class BigradedCochain:
    """A cochain on V of pure bidegree (k, l) with values in M."""

    k: int
    l: int
    cochain: Cochain

    def __post_init__(self):
        if self.cochain.arity != self.k + self.l:
            raise ShapeError(f"arity {self.cochain.arity} does not match bidegree ({self.k},{self.l})")

    @classmethod
    def of(cls, problem: ExtensionProblem, c: Cochain) -> BigradedCochain:
        degs = {bidegree_of(problem, out, ins) for (out, ins) in c.terms}
        if None in degs:
            raise ShapeError("cochain has values outside M")
        if len(degs) > 1:
            raise ShapeError(f"cochain mixes bidegrees {sorted(degs)}")
        if not degs:
            raise ShapeError("the zero cochain has no bidegree; use BigradedCochain.zero")
        k, l = degs.pop()
        return cls(k, l, c)

    @classmethod
    def zero(cls, problem: ExtensionProblem, k: int, l: int) -> BigradedCochain:
        return cls(k, l, Cochain.zero(k + l, problem.dim, problem.order))

    @classmethod
    def unit(cls, problem: ExtensionProblem, k: int, l: int, out: int, ins: tuple) -> BigradedCochain:
        if bidegree_of(problem, out, ins) != (k, l):
            raise ShapeError(f"slot {(out, ins)} is not of bidegree ({k},{l})")
        return cls(k, l, Cochain(k + l, problem.dim, {(out, tuple(ins)): 1}, problem.order))


@dataclass
class ExtensionDatum:
    lam: Cochain
    psi: Cochain
    tau: Cochain | None = None

    def psi_total(self) -> Cochain:
        return self.psi if self.tau is None else self.psi + self.tau


@dataclass
class Residuals:
    compatibility: Cochain
    maurer_cartan: Cochain
    cocycle: Cochain

    def all_zero(self) -> bool:
        return self.compatibility.is_zero() and self.maurer_cartan.is_zero() and self.cocycle.is_zero()

    def as_tuple(self) -> tuple[Cochain, Cochain, Cochain]:
        return self.maurer_cartan, self.compatibility, self.cocycle


def _check_datum(problem: ExtensionProblem, datum: ExtensionDatum) -> None:
    for name, c, want in (("lam", datum.lam, (1, 1)), ("psi", datum.psi, (0, 2)), ("tau", datum.tau, (0, 2))):
        if c is None:
            continue
        if c.dim != problem.dim or c.arity != 2:
            raise ShapeError(f"{name} must be a 2-cochain on a space of dim {problem.dim}")
        for out, ins in c.terms:
            if bidegree_of(problem, out, ins) != want:
                raise ShapeError(f"{name} has a term {(out + 1, tuple(i + 1 for i in ins))} outside C^{want}")


def assemble(problem: ExtensionProblem, datum: ExtensionDatum, name: str | None = None) -> Algebra:
    _check_datum(problem, datum)
    d = problem.delta_cochain() + problem.mu_cochain() + datum.lam + datum.psi_total()
    return d.to_algebra(name)


def extension_conditions_residuals(problem: ExtensionProblem, datum: ExtensionDatum) -> Residuals:
    _check_datum(problem, datum)
    delta, mu = problem.delta_cochain(), problem.mu_cochain()
    lam, psi = datum.lam, datum.psi_total()
    compat = gbracket(mu, lam)
    mc = gbracket(delta, lam) + gbracket(lam, lam).scale(HALF) + gbracket(mu, psi)
    cocycle = gbracket(delta + lam, psi)
    return Residuals(compat, mc, cocycle)


def split_datum(problem: ExtensionProblem, A: Algebra) -> ExtensionDatum:
    """Read lam and psi off a structure on V whose restrictions to W and M are delta and mu."""
    lam, psi = {}, {}
    for (i, j, k), v in A.c.items():
        deg = bidegree_of(problem, k, (i, j))
        if deg == (1, 1):
            lam[(k, (i, j))] = v
        elif deg == (0, 2):
            psi[(k, (i, j))] = v
    n, o = problem.dim, problem.order
    return ExtensionDatum(Cochain(2, n, lam, o), Cochain(2, n, psi, o))


# --- linear pieces -----------------------------------------------------------

def _image_columns(f, basis: list[Cochain]) -> list[dict]:
    return [f(b).to_vector() for b in basis]


def _kernel_of_map(f, basis: list[Cochain], order: int) -> list[dict]:
    """Coefficient vectors x with f(sum x_j basis_j) = 0."""
    cols = _image_columns(f, basis)
    rows: dict[int, dict] = {}
    for j, col in enumerate(cols):
        for i, v in col.items():
            rows.setdefault(i, {})[j] = v
    return kernel_basis(list(rows.values()), len(basis), order)


def _combine(basis: list[Cochain], coeffs: dict, problem: ExtensionProblem) -> Cochain:
    out = Cochain.zero(2, problem.dim, problem.order)
    for j, v in coeffs.items():
        out = out + basis[j].scale(v)
    return out


def _complement(sub: list[dict], vectors: list[dict], order: int) -> list[dict]:
    """Members of vectors that extend a basis of span(sub) one at a time."""
    rows, _ = _to_field(list(sub) + list(vectors), order)
    ech = Echelon()
    for r in rows[:len(sub)]:
        ech.add(r)
    keep = []
    for vec, r in zip(vectors, rows[len(sub):]):
        if ech.add(r) is not None:
            keep.append(vec)
    return keep


@dataclass
class CohomologyPiece:
    """Z, B and a complement H = Z / B for one bidegree, as coefficient vectors on a slot basis."""

    basis: list[Cochain]
    cocycles: list[dict]
    coboundaries: list[dict]
    classes: list[dict]


def _to_coeffs(c: Cochain, slots: list[tuple[int, tuple]]) -> dict:
    index = {s: j for j, s in enumerate(slots)}
    out = {}
    for key, v in c.terms.items():
        if key not in index:
            raise ShapeError(f"term {key} outside the slot basis")
        out[index[key]] = v
    return out


def h_piece(problem: ExtensionProblem, k: int, l: int, cocycle_map, coboundary_map,
            source: tuple[int, int]) -> CohomologyPiece:
    """Z = ker(cocycle_map) on C^{k,l}, B = image of coboundary_map on C^source."""
    slots = bigraded_slots(problem, k, l)
    basis = [Cochain(k + l, problem.dim, {s: 1}, problem.order) for s in slots]
    z = _kernel_of_map(cocycle_map, basis, problem.order)
    prev = [Cochain(sum(source), problem.dim, {s: 1}, problem.order) for s in bigraded_slots(problem, *source)]
    b = [_to_coeffs(coboundary_map(c), slots) for c in prev]
    b = [v for v in b if v]
    return CohomologyPiece(basis, z, b, _complement(b, z, problem.order))


# --- central extensions ------------------------------------------------------

def _s(x, order=DEFAULT_ORDER) -> CycloScalar:
    return CycloScalar.coerce(x, order)


def _form_samples(w: int, grid: list, order: int) -> list[tuple[str, ExactMatrix]]:
    """Representatives of bilinear forms on C^w up to congruence, families at the grid."""
    if w == 1:
        return [("Zero", ExactMatrix([[0]], order)), ("(1)", ExactMatrix([[1]], order))]
    if w == 2:
        out = [("Zero", ExactMatrix.zeros(2, order=order)), ("C", form_C(order))]
        out += [(f"B({p}:{q})", form_B(p, q, order)) for p, q in grid]
        return out
    if w == 3:
        out = [(t, form3(t, order=order)) for t in ("Zero", "B3", "B4", "B5", "B6")]
        for tag in ("B1", "B2"):
            out += [(f"{tag}({p}:{q})", form3(tag, p, q, order)) for p, q in grid]
        return out
    raise ValueError("forms are only enumerated up to dimension 3")


def _psi_from_form(B: ExactMatrix, w: int, order: int) -> Cochain:
    # B[j][i] = beta(e_i, e_j); ideal coordinate 0, W coordinates 1..w
    terms = {(0, (i + 1, j + 1)): B[j, i] for i in range(w) for j in range(w) if B[j, i]}
    return Cochain(2, w + 1, terms, order)


def central_grid(order: int = DEFAULT_ORDER) -> list[tuple]:
    """Projective samples for form families: special values and a few generic pairs."""
    g = cyclo_eval("z^4", order)
    return [(_s(a, order), _s(b, order)) for a, b in
            [(0, 0), (1, 0), (1, 1), (1, -1), (1, 2), (1, g),
             (2, 3), (3, -5), (-4, 7)]]


def central_ext_classes(delta: Algebra, grid: list | None = None, budget: int = 60,
                        seed: int = 0) -> list[Algebra]:
    """Extensions of delta by a 1-dim completely trivial ideal, one per class found.

    The ideal is the first coordinate of the result.
    """
    w, o = delta.dim, delta.order
    if w > 3:
        raise ValueError("central extensions are enumerated for dim W <= 3")
    problem = ExtensionProblem(delta, zero_algebra(1, o))
    grid = central_grid(o) if grid is None else grid
    d = problem.delta_cochain()
    cands: list[tuple[str, Cochain]] = []
    if not delta.c:
        for label, B in _form_samples(w, grid, o):
            cands.append((label, _psi_from_form(B, w, o)))
    else:
        piece = h_piece(problem, 0, 2, lambda c: gbracket(d, c), lambda c: gbracket(d, c), (0, 1))
        r = len(piece.classes)
        if r > 4:
            raise ValueError(f"H^(0,2) has dimension {r}; the grid enumeration stops at 4")
        basis = piece.basis
        seen = set()
        for coeffs in product((0, 1, -1), repeat=r):
            nz = [c for c in coeffs if c]
            if nz and nz[0] != 1:
                continue
            vec: dict = {}
            for c, cls in zip(coeffs, piece.classes):
                for j, v in cls.items():
                    vec[j] = vec.get(j, 0) + c * v
            key = tuple(sorted((j, v) for j, v in vec.items() if v))
            if key in seen:
                continue
            seen.add(key)
            label = "0" if not nz else "+".join(f"{c}*h{i + 1}" for i, c in enumerate(coeffs) if c)
            cands.append((label, _combine(basis, {j: v for j, v in vec.items() if v}, problem)))
    algs = []
    for label, psi in cands:
        lam = Cochain.zero(2, problem.dim, o)
        datum = ExtensionDatum(lam, psi)
        if not extension_conditions_residuals(problem, datum).all_zero():
            continue
        A = assemble(problem, datum, f"ext[{label}]")
        ok, _ = is_associative(A)
        if not ok:
            raise AssertionError("assembled central extension is not associative")
        algs.append(A)
    return dedupe(algs, budget=budget, seed=seed)


# --- deduplication -----------------------------------------------------------

def dedupe(algs: list[Algebra], budget: int = 60, seed: int = 0) -> list[Algebra]:
    """Keep the first of every isomorphism class; an inconclusive pair keeps both."""
    kept: list[Algebra] = []
    groups: dict[str, list[Algebra]] = {}
    seen: set = set()
    for A in algs:
        if A in seen:
            continue
        seen.add(A)
        key = repr(sorted(fingerprint(A).fields().items(), key=lambda kv: kv[0]))
        group = groups.setdefault(key, [])
        if any(are_isomorphic(B, A, budget=budget, seed=seed).is_witness for B in group):
            continue
        group.append(A)
        kept.append(A)
    return kept


# --- codimension-one extensions of the trivial 1-dim algebra ------------------

def parameter_grid(n: int = 4, order: int = DEFAULT_ORDER) -> list[CycloScalar]:
    """Ratios t for two-term combinations: the special values, then n generic ones with inverses."""
    g = cyclo_eval("z^4", order)
    special = [_s(1, order), _s(-1, order), _s(2, order), _s(HALF, order), g, g.inverse()]
    generic = [Fraction(3, 2), Fraction(-5, 3), Fraction(7, 4), Fraction(-11, 5), Fraction(13, 7)]
    out = list(special)
    for t in generic[:max(0, n)]:
        out += [_s(t, order), _s(1 / t, order)]
    return out


@dataclass
class Codim1Setup:
    problem: ExtensionProblem
    compat: CohomologyPiece
    psi_basis: list[Cochain]


def codim1_setup(mu: Algebra) -> Codim1Setup:
    problem = ExtensionProblem(zero_algebra(1, mu.order), mu)
    m_c = problem.mu_cochain()
    piece = h_piece(problem, 1, 1, lambda c: gbracket(m_c, c), lambda c: gbracket(m_c, c), (0, 1))
    psi_basis = problem.bigraded_basis(0, 2)
    return Codim1Setup(problem, piece, psi_basis)


def _lambda_candidates(setup: Codim1Setup, grid: list, max_terms: int):
    classes = setup.compat.classes
    basis = setup.compat.basis
    o = setup.problem.order
    one = _s(1, o)
    r = len(classes)
    for size in range(0, min(max_terms, r) + 1):
        for idx in combinations(range(r), size):
            if size == 2:
                coeff_sets = [(one, t) for t in grid]
            else:
                coeff_sets = [(one,) + s for s in product((one, -one), repeat=max(0, size - 1))]
            for coeffs in coeff_sets:
                vec: dict = {}
                for c, i in zip(coeffs, idx):
                    for j, v in classes[i].items():
                        vec[j] = vec.get(j, 0) + c * v
                yield _combine(basis, {j: v for j, v in vec.items() if v}, setup.problem)


def _psi_solutions(setup: Codim1Setup, lam: Cochain) -> list[Cochain]:
    """psi with [mu, psi] = -1/2 [lam, lam] and [lam, psi] = 0: a particular solution plus kernel subset sums."""
    problem = setup.problem
    o = problem.order
    m_c = problem.mu_cochain()
    target = gbracket(lam, lam).scale(-HALF).to_vector()
    cols_mc = [gbracket(m_c, b).to_vector() for b in setup.psi_basis]
    cols_co = [gbracket(lam, b).to_vector() for b in setup.psi_basis]
    rows: dict = {}
    for tag, cols in (("mc", cols_mc), ("co", cols_co)):
        for j, col in enumerate(cols):
            for i, v in col.items():
                rows.setdefault((tag, i), {})[j] = v
    keys = sorted(set(rows) | {("mc", i) for i in target})
    A = [rows.get(k, {}) for k in keys]
    rhs = [target.get(k[1], 0) if k[0] == "mc" else 0 for k in keys]
    n = len(setup.psi_basis)
    y0 = solve_linear(A, rhs, n, o)
    if y0 is None:
        return []
    kern = kernel_basis(A, n, o)
    out = []
    for size in range(len(kern) + 1):
        for sub in combinations(kern, size):
            y = dict(y0)
            for vec in sub:
                for j, v in vec.items():
                    y[j] = y.get(j, 0) + v
            out.append(_combine(setup.psi_basis, {j: v for j, v in y.items() if v}, problem))
    return out


def _orbit_key(A: Algebra, m: int) -> tuple:
    """Smallest presentation under signed permutations of the M basis and w -> -w."""
    n = A.dim
    best = None
    keyed = []
    for (i, j, k), v in A.c.items():
        pos = v.sort_key()
        keyed.append((i, j, k, {1: pos, -1: tuple(-x for x in pos)}))
    for perm in permutations(range(m)):
        for signs in product((1, -1), repeat=m):
            for ws in (1, -1):
                s = list(signs) + [ws] * (n - m)
                p = list(perm) + list(range(m, n))
                inv = {p[i]: i for i in range(n)}
                items = []
                for i, j, k, signed in keyed:
                    a, b, c = inv[i], inv[j], inv[k]
                    items.append(((a, b, c), signed[s[a] * s[b] * s[c]]))
                key = tuple(sorted(items))
                if best is None or key < best:
                    best = key
    return best


def codim1_ext_enumerate(mu: Algebra, grid: list | None = None, max_terms: int = 3,
                         budget: int = 40, seed: int = 0, deduplicate: bool = True) -> list[Algebra]:
    """Structures mu + lam + psi on M + <w>, deduplicated up to isomorphism.

    lam runs over small combinations of a basis of the compatibility classes
    modulo coboundaries; psi over a particular solution of the remaining
    linear conditions plus subset sums of their homogeneous solutions.
    """
    ok, _ = is_associative(mu)
    if not ok or not is_nilpotent(mu):
        raise ValueError("the ideal must be an associative nilpotent algebra")
    setup = codim1_setup(mu)
    problem = setup.problem
    grid = parameter_grid(order=mu.order) if grid is None else grid
    found: list[Algebra] = []
    seen = set()
    for lam in _lambda_candidates(setup, grid, max_terms):
        for psi in _psi_solutions(setup, lam):
            datum = ExtensionDatum(lam, psi)
            A = assemble(problem, datum)
            key = _orbit_key(A, problem.m)
            if key in seen:
                continue
            seen.add(key)
            if not extension_conditions_residuals(problem, datum).all_zero():
                raise AssertionError("extension datum fails its own conditions")
            good, _ = is_associative(A)
            if not good or not is_nilpotent(A):
                continue
            found.append(A.with_name(f"ext#{len(found) + 1}"))
    log.info("codim-1 extensions of %s: %d structures before deduplication", mu.name or render(mu), len(found))
    if not deduplicate:
        return found
    return dedupe(found, budget=budget, seed=seed)


def contains_class(algs: list[Algebra], target: Algebra, budget: int = 120, seed: int = 0) -> Algebra | None:
    """The member of algs isomorphic to target, if the engine finds a witness."""
    fp = fingerprint(target).fields()
    for A in algs:
        if fingerprint(A).fields() != fp:
            continue
        if are_isomorphic(A, target, budget=budget, seed=seed).is_witness:
            return A
    return None


# --- lambda branches -----------------------------------------------------------

def lambda_branches(mu: Algebra) -> list[dict]:
    """Solution branches of the extension conditions over mu, lam in the class complement.

    Returns one dict per branch found by sympy, restricted to the lam
    coordinates (symbols x1..xr); psi coordinates are y1..ym.
    """
    import sympy

    if not mu.is_rational():
        raise ValueError("branch analysis needs rational structure constants")
    setup = codim1_setup(mu)
    problem = setup.problem
    classes = setup.compat.classes
    xs = sympy.symbols(f"x1:{len(classes) + 1}")
    ys = sympy.symbols(f"y1:{len(setup.psi_basis) + 1}")
    lam_terms: dict = {}
    for x, cls in zip(xs, classes):
        for j, v in cls.items():
            key = next(iter(setup.compat.basis[j].terms))
            lam_terms[key] = lam_terms.get(key, 0) + sympy.Rational(str(v.to_fraction())) * x
    psi_terms = {next(iter(b.terms)): y for y, b in zip(ys, setup.psi_basis)}
    eqs = _symbolic_associator(problem, mu, lam_terms, psi_terms)
    sols = sympy.solve(eqs, list(xs) + list(ys), dict=True)
    branches = []
    for s in sols:
        lam_part = {str(x): s.get(x, x) for x in xs}
        if lam_part not in branches:
            branches.append(lam_part)
    return branches


def _symbolic_associator(problem: ExtensionProblem, mu: Algebra, lam_terms: dict, psi_terms: dict) -> list:
    import sympy

    n = problem.dim
    T = [[[0] * n for _ in range(n)] for _ in range(n)]
    for (i, j, k), v in mu.c.items():
        T[i][j][k] += sympy.Rational(str(v.to_fraction()))
    for (k, (i, j)), v in list(lam_terms.items()) + list(psi_terms.items()):
        T[i][j][k] += v
    eqs = set()
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for l in range(n):
                    e = sum(T[a][b][k] * T[k][c][l] - T[b][c][k] * T[a][k][l] for k in range(n))
                    e = sympy.expand(e)
                    if e != 0:
                        eqs.add(e)
    return sorted(eqs, key=sympy.default_sort_key)
