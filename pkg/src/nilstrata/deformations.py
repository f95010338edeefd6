"""Deformations: polynomial families of structures and order-bounded obstructions.

For a base algebra d and cocycles delta_1..delta_r representing H^2, the
family d + sum t_i delta_i is corrected order by order. At each order the
coefficient of ½[d_t, d_t] on a monomial is split as a coboundary D(phi) plus
a combination of fixed H^3 representatives; -phi becomes the correction term
and the H^3 coordinates become the coefficients of the relations. From order
three on, coefficients are first reduced modulo the ideal of the lower-order
relations, since only that quotient has to vanish.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

import sympy

from .algebra import Algebra, parse_structure
from .cyclo import CycloScalar
from .expr import Poly, parse_psi_sum
from .hochschild import (Cochain, coboundary_columns, cohomology_dims, gbracket,
                         is_coboundary, is_cocycle, _differential_columns)
from .linalg import Echelon, _to_field, kernel_basis, solve_linear

HALF = Fraction(1, 2)


class DegreeError(ValueError):
    pass


class BasisError(ValueError):
    pass


# --- families ------------------------------------------------------------------

@dataclass
class DeformationFamily:
    """Structure constants polynomial in the parameters; evaluating at 0 gives base."""

    base: Algebra
    params: tuple[str, ...]
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        extra = set().union(*(p.symbols() for p in self.terms.values())) - set(self.params)
        if extra:
            raise ValueError(f"unknown parameter symbol(s): {', '.join(sorted(extra))}")
        if self.at({t: 0 for t in self.params}) != self.base:
            raise ValueError("the family does not reduce to its base algebra at t = 0")

    @classmethod
    def parse(cls, text: str, base: Algebra, params: tuple[str, ...] | None = None) -> DeformationFamily:
        psi = parse_psi_sum(text, base.order)
        for (i, j, k) in psi.terms:
            if max(i, j, k) >= base.dim:
                raise ValueError(f"index out of range in p({i + 1},{j + 1};{k + 1}) for dim {base.dim}")
        syms = set().union(*(p.symbols() for p in psi.terms.values())) if psi.terms else set()
        params = tuple(sorted(syms)) if params is None else tuple(params)
        return cls(base, params, dict(psi.terms))

    @classmethod
    def linear(cls, base: Algebra, cochains: list[Cochain], params: tuple[str, ...] | None = None) -> DeformationFamily:
        """base + sum t_i cochain_i."""
        params = params or tuple(f"t{i + 1}" for i in range(len(cochains)))
        o = base.order
        terms = {key: Poly.const(v, o) for key, v in base.c.items()}
        for t, c in zip(params, cochains):
            for (k, (i, j)), v in c.terms.items():
                add = Poly.var(t, o).scale(v)
                terms[(i, j, k)] = terms[(i, j, k)] + add if (i, j, k) in terms else add
        return cls(base, tuple(params), terms)

    @property
    def order(self) -> int:
        return self.base.order

    def degree(self) -> int:
        return max((p.degree() for p in self.terms.values()), default=0)

    def at(self, values: dict) -> Algebra:
        vals = {k: CycloScalar.coerce(v, self.order) for k, v in values.items()}
        c = {}
        for key, p in self.terms.items():
            q = p.substitute(vals)
            if not q.is_constant():
                raise ValueError(f"parameters left unassigned: {', '.join(sorted(q.symbols()))}")
            c[key] = q.constant()
        return Algebra(self.base.dim, c, None, self.order)


def _associator_polys(F: DeformationFamily) -> list[Poly]:
    n = F.base.dim
    by_ij: dict = {}
    for (i, j, k), p in F.terms.items():
        by_ij.setdefault((i, j), {})[k] = p
    out = []
    zero = Poly({}, F.order)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                acc: dict[int, Poly] = {}
                for k, p in by_ij.get((a, b), {}).items():
                    for l, q in by_ij.get((k, c), {}).items():
                        acc[l] = acc.get(l, zero) + p * q
                for k, p in by_ij.get((b, c), {}).items():
                    for l, q in by_ij.get((a, k), {}).items():
                        acc[l] = acc.get(l, zero) - p * q
                out.extend(v for v in acc.values() if v.terms)
    return out


def family_associative(F: DeformationFamily, degree_bound: int | None = None, sampled: bool = False) -> bool:
    """True iff the family is associative identically in its parameters.

    With sampled=True the check evaluates at 2D+1 rational points per
    parameter instead of expanding symbolically.
    """
    D = F.degree()
    if degree_bound is not None and D > degree_bound:
        raise DegreeError(f"family has degree {D} > bound {degree_bound}")
    if not sampled:
        return not _associator_polys(F)
    from itertools import product

    from .algebra import is_associative

    bound = degree_bound if degree_bound is not None else D
    pts = [Fraction(k, 3) for k in range(1, 2 * bound + 2)]
    for vals in product(pts, repeat=len(F.params)):
        ok, _ = is_associative(F.at(dict(zip(F.params, vals))))
        if not ok:
            return False
    return True


# --- H^2 data --------------------------------------------------------------------

@dataclass
class H2Report:
    cocycle: list[bool]
    coboundary: list[bool]
    independent: bool
    count: int
    h2: int

    @property
    def ok(self) -> bool:
        return (all(self.cocycle) and not any(self.coboundary) and self.independent
                and self.count == self.h2)


def verify_h2_data(A: Algebra, cochains: list[Cochain]) -> H2Report:
    """Cocycles, none a coboundary, independent modulo coboundaries, as many as h2."""
    coc = [is_cocycle(A, c) for c in cochains]
    cob = [is_coboundary(A, c) if ok else False for c, ok in zip(cochains, coc)]
    base = list(coboundary_columns(A, 2))
    rows, _ = _to_field(base + [c.to_vector() for c in cochains], A.order)
    ech = Echelon()
    for r in rows[:len(base)]:
        ech.add(r)
    start = ech.rank
    for r in rows[len(base):]:
        ech.add(r)
    h2 = cohomology_dims(A, 2)[2]
    return H2Report(coc, cob, ech.rank - start == len(cochains), len(cochains), h2)


def h2_data_of(entry) -> tuple[Algebra, list[Cochain]]:
    """The base algebra and its listed H^2 cocycles for a catalog entry."""
    text = entry.deform.get("cocycles")
    if not text:
        raise ValueError(f"{entry.name} carries no cocycle data")
    A = parse_structure(entry.structure, entry.dim)
    return A, [Cochain.from_psi(s, entry.dim) for s in text.split("|")]


# --- obstruction calculus --------------------------------------------------------

@dataclass
class H3Frame:
    """Fixed H^3 representatives and the linear system splitting a cocycle."""

    A: Algebra
    reps: list[Cochain]
    columns: list[dict]

    @classmethod
    def build(cls, A: Algebra) -> H3Frame:
        bcols = list(coboundary_columns(A, 3))
        d3 = _differential_columns(A, 3, 4)
        rows: dict[int, dict] = {}
        for j, col in enumerate(d3):
            for i, v in col.items():
                rows.setdefault(i, {})[j] = v
        z = kernel_basis(list(rows.values()), A.dim ** 4, A.order)
        fld, _ = _to_field(bcols + z, A.order)
        ech = Echelon()
        for r in fld[:len(bcols)]:
            ech.add(r)
        reps = []
        for vec, r in zip(z, fld[len(bcols):]):
            if ech.add(r) is not None:
                reps.append(Cochain.from_vector(vec, 3, A.dim, A.order))
        return cls(A, reps, bcols + [h.to_vector() for h in reps])

    def split(self, c: Cochain) -> tuple[Cochain, list[CycloScalar]]:
        """c = D(phi) + sum r_a rep_a; returns (phi, r)."""
        target = c.to_vector()
        eqs: dict[int, dict] = {}
        for j, col in enumerate(self.columns):
            for i, v in col.items():
                eqs.setdefault(i, {})[j] = v
        coords = sorted(set(eqs) | set(target))
        sol = solve_linear([eqs.get(i, {}) for i in coords], [target.get(i, 0) for i in coords],
                           len(self.columns), self.A.order)
        if sol is None:
            raise ValueError("obstruction coefficient is not a cocycle")
        nb = len(self.columns) - len(self.reps)
        zero = CycloScalar((), self.A.order)
        phi = Cochain.from_vector({j: v for j, v in sol.items() if j < nb}, 2, self.A.dim, self.A.order)
        return phi, [sol.get(nb + a, zero) for a in range(len(self.reps))]


@dataclass
class RelationSet:
    """One relation per H^3 representative, as sympy polynomials in the parameters."""

    symbols: tuple
    relations: list
    corrections: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def nonzero(self) -> list:
        return [r for r in self.relations if r != 0]

    def distinct(self) -> list:
        out = []
        for r in self.nonzero():
            if all(sympy.expand(r - s) != 0 for s in out):
                out.append(r)
        return out

    def homogeneous_part(self, deg: int) -> list:
        out = []
        for r in self.relations:
            p = sympy.Poly(r, *self.symbols)
            part = sum((c * sympy.prod([s ** e for s, e in zip(self.symbols, m)])
                        for m, c in p.terms() if sum(m) == deg), sympy.Integer(0))
            out.append(sympy.expand(part))
        return out

    def text(self) -> list[str]:
        return [str(sympy.factor(r)) for r in self.relations]


def _sympy_scalar(c: CycloScalar):
    if c.is_rational():
        f = c.to_fraction()
        return sympy.Rational(f.numerator, f.denominator)
    zeta = sympy.exp(2 * sympy.pi * sympy.I / c.order)
    return sum(sympy.Rational(v.numerator, v.denominator) * zeta ** k for k, v in enumerate(c.coeffs) if v)


def _monomials(r: int, deg: int) -> list[tuple[int, ...]]:
    out = []
    for combo in combinations_with_replacement(range(r), deg):
        e = [0] * r
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


def _add_exp(a, b):
    return tuple(x + y for x, y in zip(a, b))


def obstruction_relations(A: Algebra, h2basis: list[Cochain], order: int = 2,
                          params: tuple[str, ...] | None = None) -> RelationSet:
    if order not in (2, 3):
        raise ValueError(f"order must be 2 or 3 (got {order})")
    if not h2basis:
        raise BasisError("empty H^2 basis")
    report = verify_h2_data(A, h2basis)
    if not report.ok:
        raise BasisError("the cochains do not form a basis of H^2")
    r = len(h2basis)
    names = params or tuple(f"t{i + 1}" for i in range(r))
    syms = sympy.symbols(names)
    frame = H3Frame.build(A)
    nrel = len(frame.reps)
    rels = [sympy.Integer(0)] * nrel
    notes = []
    if nrel == 0:
        notes.append("H^3 vanishes: unobstructed")
    # X[exponent] = term of the corrected family at that monomial
    X: dict[tuple, Cochain] = {}
    for i, c in enumerate(h2basis):
        e = [0] * r
        e[i] = 1
        X[tuple(e)] = c

    def coefficient(gamma: tuple) -> Cochain:
        acc = Cochain.zero(3, A.dim, A.order)
        for a, xa in X.items():
            b = tuple(g - x for g, x in zip(gamma, a))
            if min(b) < 0 or b not in X:
                continue
            acc = acc + gbracket(xa, X[b]).scale(HALF)
        return acc

    def mono(e):
        return sympy.prod([s ** k for s, k in zip(syms, e)])

    for deg in range(2, order + 1):
        coeffs = {g: coefficient(g) for g in _monomials(r, deg)}
        if deg > 2 and nrel:
            coeffs = _reduce_mod_ideal(coeffs, [sympy.expand(x) for x in rels], syms, A)
            notes.append(f"order {deg} coefficients reduced modulo the order {deg - 1} relation ideal")
        new_terms = {}
        for g, c in coeffs.items():
            if c.is_zero():
                continue
            phi, rs = frame.split(c)
            if not phi.is_zero():
                new_terms[g] = -phi
            for a, v in enumerate(rs):
                if v:
                    rels[a] = rels[a] + _sympy_scalar(v) * mono(g)
        X.update(new_terms)
    corrections = {g: c for g, c in X.items() if sum(g) > 1}
    return RelationSet(tuple(syms), [sympy.expand(x) for x in rels], corrections, notes)


def _reduce_mod_ideal(coeffs: dict, gens: list, syms, A: Algebra) -> dict:
    """Reduce the cochain-valued polynomial sum coeff_g t^g modulo the ideal of gens."""
    gens = [g for g in gens if g != 0]
    if not gens:
        return coeffs
    G = sympy.groebner(gens, *syms, order="grevlex")
    per_coord: dict[int, object] = {}
    for g, c in coeffs.items():
        m = sympy.prod([s ** k for s, k in zip(syms, g)])
        for idx, v in c.to_vector().items():
            per_coord[idx] = per_coord.get(idx, 0) + _sympy_scalar(v) * m
    out: dict[tuple, dict] = {}
    for idx, p in per_coord.items():
        _, rem = G.reduce(sympy.expand(p))
        if rem == 0:
            continue
        for mon, val in sympy.Poly(rem, *syms).terms():
            num = sympy.Rational(val)
            out.setdefault(mon, {})[idx] = CycloScalar.rational(Fraction(int(num.p), int(num.q)), A.order)
    return {g: Cochain.from_vector(vec, 3, A.dim, A.order) for g, vec in out.items()}


# --- comparing relation ideals ------------------------------------------------

def quadratic_span_equal(rels: list, target: list, syms) -> bool:
    """Equality of the linear spans of two lists of polynomials."""
    return _span_rank(rels + target, syms) == _span_rank(rels, syms) == _span_rank(target, syms)


def _span_rank(polys: list, syms) -> int:
    vecs = []
    for p in polys:
        p = sympy.expand(p)
        if p == 0:
            continue
        vecs.append({m: c for m, c in sympy.Poly(p, *syms).terms()})
    if not vecs:
        return 0
    keys = sorted({m for v in vecs for m in v})
    M = sympy.Matrix([[v.get(k, 0) for k in keys] for v in vecs])
    return M.rank()


def truncated_ideal(gens: list, syms, max_deg: int) -> list:
    """Spanning set of (ideal generated by gens) modulo monomials of degree > max_deg."""
    out = []
    frontier = [sympy.expand(g) for g in gens if sympy.expand(g) != 0]
    while frontier:
        nxt = []
        for g in frontier:
            t = _truncate(g, syms, max_deg)
            if t == 0:
                continue
            out.append(t)
            low = min(sum(m) for m, _ in sympy.Poly(t, *syms).terms())
            if low < max_deg:
                nxt.extend(sympy.expand(s * t) for s in syms)
        frontier = nxt
    return out


def _truncate(p, syms, max_deg: int):
    if p == 0:
        return p
    return sympy.expand(sum((c * sympy.prod([s ** e for s, e in zip(syms, m)])
                             for m, c in sympy.Poly(p, *syms).terms() if sum(m) <= max_deg),
                            sympy.Integer(0)))


def ideals_agree(gens_a: list, gens_b: list, syms, max_deg: int = 3) -> bool:
    """Equality of the two ideals modulo terms of degree > max_deg."""
    a = truncated_ideal(gens_a, syms, max_deg)
    b = truncated_ideal(gens_b, syms, max_deg)
    return _span_rank(a + b, syms) == _span_rank(a, syms) == _span_rank(b, syms)


# --- catalog checks ----------------------------------------------------------------

def _parse_relations(text: str, syms) -> list:
    env = {str(s): s for s in syms}
    return [sympy.sympify(r.strip().replace("^", "**"), locals=env) for r in text.split("|")]


def check_entry(entry, order: int = 3) -> list:
    """Checks of the deformation data recorded for a catalog entry."""
    from .catalog import FAIL, PASS, SKIP, CheckResult
    from .isomorphism import fingerprint

    A, cocycles = h2_data_of(entry)
    out = []
    name = entry.name
    rep = verify_h2_data(A, cocycles)
    out.append(CheckResult(name, "H2 basis", rep.h2, rep.count, PASS if rep.ok else FAIL,
                           f"cocycles {rep.cocycle}, coboundaries {rep.coboundary}, independent {rep.independent}"))
    if "family" in entry.deform:
        F = DeformationFamily.parse(entry.deform["family"], A)
        ok = family_associative(F)
        out.append(CheckResult(name, "family associative", True, ok, PASS if ok else FAIL,
                               f"parameters {', '.join(F.params)}, degree {F.degree()}"))
        moved = fingerprint(F.at({t: 1 for t in F.params})).fields() != fingerprint(A).fields()
        out.append(CheckResult(name, "family leaves the stratum", True, moved, PASS if moved else FAIL,
                               "fingerprint at t = 1 against the base"))
    if not rep.ok:
        return out
    rels = obstruction_relations(A, cocycles, order)
    syms = rels.symbols
    stated = entry.deform.get("relations")
    if stated is None:
        out.append(CheckResult(name, f"order {order} relations", None, rels.text(), SKIP, "no stated relations"))
        return out
    want = _parse_relations(stated, syms)
    quad_want = [_truncate(w, syms, 2) for w in want]
    quad_ok = quadratic_span_equal(rels.homogeneous_part(2), quad_want, syms)
    out.append(CheckResult(name, "quadratic relations", [str(w) for w in quad_want if w != 0],
                           [str(r) for r in rels.homogeneous_part(2) if r != 0],
                           PASS if quad_ok else FAIL, "compared as linear spans"))
    if order >= 3:
        literal = {sympy.expand(r) for r in rels.nonzero()} == {sympy.expand(w) for w in want}
        ideal_ok = ideals_agree(rels.relations, want, syms, 3)
        note = "literal match" if literal else "equal as ideals modulo degree 4, not literally"
        out.append(CheckResult(name, "order 3 relations", [str(w) for w in want], rels.text(),
                               PASS if ideal_ok else FAIL, note))
        distinct = len({sympy.expand(w) for w in want if w != 0})
        out.append(CheckResult(name, "distinct stated relations", len(want), distinct, PASS,
                               "a repeated stated relation is redundant" if distinct < len(want) else ""))
    return out
