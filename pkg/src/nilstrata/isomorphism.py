"""Isomorphism decisions for small algebras.

Invariants first: any differing basis-change invariant gives a sound
refutation. Otherwise the candidate g is confined to the exact linear space of
maps sending every characteristic subspace of one algebra onto the matching
subspace of the other, a seeded numeric search solves the transport equations
inside that space, and the snapped result is verified exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .algebra import (Algebra, Subspace, annihilator_kernel, center, change_of_basis,
                      is_commutative, left_annihilator, power_subspaces, product_span,
                      right_annihilator, unit)
from .cyclo import CycloScalar
from .linalg import ExactMatrix, kernel_basis
from .search import Budget, ComplexSystem, search_exact
from .verdict import Inconclusive, IsoVerdict, Refuted, Witness

DEFAULT_BUDGET = 300


def _preimage_into(A: Algebra, target: Subspace) -> Subspace:
    """{x : xA and Ax lie in target}."""
    n = A.dim
    eqs = []
    phis = target.equations()
    for i in range(n):
        for phi in phis:
            left = {}
            right = {}
            for j in range(n):
                lv = sum((phi.get(k, 0) * v for k, v in A.basis_product(j, i).items()), 0)
                rv = sum((phi.get(k, 0) * v for k, v in A.basis_product(i, j).items()), 0)
                if lv:
                    left[j] = lv
                if rv:
                    right[j] = rv
            if left:
                eqs.append(left)
            if right:
                eqs.append(right)
    return Subspace.from_equations(eqs, n, A.order)


def _side_annihilator(A: Algebra, U: Subspace, side: str) -> Subspace:
    """{x : x U = 0} for side 'left', {x : U x = 0} for side 'right'."""
    n = A.dim
    eqs = []
    for u in U.rows:
        for k in range(n):
            row = {}
            for j in range(n):
                prod = A.mul(unit(j, A.order), u) if side == "left" else A.mul(u, unit(j, A.order))
                v = prod.get(k)
                if v:
                    row[j] = v
            if row:
                eqs.append(row)
    return Subspace.from_equations(eqs, n, A.order)


def characteristic_subspaces(A: Algebra) -> dict[str, Subspace]:
    """Subspaces fixed by every automorphism, in a fixed order."""
    n = A.dim
    out: dict[str, Subspace] = {}
    chain = power_subspaces(A)
    for k, S in enumerate(chain[1:], start=2):
        out[f"A^{k}"] = S
    sq = chain[1] if len(chain) > 1 else Subspace(n, [], A.order)
    ann = annihilator_kernel(A)
    lann, rann = left_annihilator(A), right_annihilator(A)
    cen = center(A)
    out["ann"] = ann
    out["lann"] = lann
    out["rann"] = rann
    out["center"] = cen
    out["ann2"] = _preimage_into(A, ann)
    out["lann(A^2)"] = _side_annihilator(A, sq, "left")
    out["rann(A^2)"] = _side_annihilator(A, sq, "right")
    out["lann+rann"] = lann + rann
    out["ann & A^2"] = ann & sq
    out["center & A^2"] = cen & sq
    out["A.ann2"] = product_span(A, Subspace.full(n, A.order), out["ann2"]) + \
        product_span(A, out["ann2"], Subspace.full(n, A.order))
    commutators = []
    for i in range(n):
        for j in range(i + 1, n):
            v = dict(A.basis_product(i, j))
            for k, w in A.basis_product(j, i).items():
                nv = v.get(k, 0) - w
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
            commutators.append(v)
    out["[A,A]"] = Subspace(n, commutators, A.order)
    jordan = []
    for i in range(n):
        for j in range(i, n):
            v = dict(A.basis_product(i, j))
            for k, w in A.basis_product(j, i).items():
                nv = v.get(k, 0) + w
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
            jordan.append(v)
    out["A o A"] = Subspace(n, jordan, A.order)
    out["into [A,A]"] = _preimage_into(A, out["[A,A]"])
    return out


def _form_class(A: Algebra, subs: dict[str, Subspace]) -> str | None:
    """Class of the product as a bilinear form when dim A^2 = 1 and A^3 = 0."""
    sq = subs.get("A^2")
    if sq is None or sq.dim != 1 or "A^3" not in subs or subs["A^3"].dim != 0:
        return None
    from .bilinear import canon2, canon3

    n = A.dim
    basis_vec = sq.rows[0]
    piv = min(basis_vec)
    scale = basis_vec[piv]
    # B[j][i] = coefficient of the A^2 generator in e_i e_j
    M = [[A.basis_product(i, j).get(piv, CycloScalar((), A.order)) / scale for i in range(n)] for j in range(n)]
    B = ExactMatrix(M, A.order)
    K = kernel_basis(B.sparse_rows() + B.T.sparse_rows(), n, A.order)
    KS = Subspace(n, K, A.order)
    keep = [i for i in range(n) if i not in set(KS.pivots())]
    Q = ExactMatrix([[M[i][j] for j in keep] for i in keep], A.order) if keep else None
    if Q is None:
        return "zero"
    if len(keep) == 1:
        return "rank1-sym"
    if len(keep) == 2:
        return "2:" + repr(canon2(Q).key)
    if len(keep) == 3:
        return "3:" + repr(canon3(Q).key)
    return f"{len(keep)}-dim"


def _orientation(A: Algebra, subs: dict[str, Subspace]) -> str | None:
    """Ratio (xu : ux) on [A,A] for x in R outside A^2 and u outside R.

    R is the set of elements multiplying A into [A,A]. The ratio is a basis
    invariant when A^3 = 0, dim [A,A] = 1, dim R/A^2 = dim A/R = 1 and
    R.R = 0; it tells an algebra apart from its opposite.
    """
    sq, comm, R = subs.get("A^2"), subs["[A,A]"], subs["into [A,A]"]
    if sq is None or subs.get("A^3", sq).dim != 0 or comm.dim != 1:
        return None
    if R.dim - sq.dim != 1 or A.dim - R.dim != 1:
        return None
    if any(A.mul(x, y) for x in R.rows for y in R.rows):
        return None
    x = next(r for r in R.rows if not sq.contains(r))
    u = next(unit(i, A.order) for i in range(A.dim) if not R.contains(unit(i, A.order)))
    c = comm.rows[0]
    piv = min(c)
    left, right = A.mul(x, u).get(piv, 0) / c[piv], A.mul(u, x).get(piv, 0) / c[piv]
    if left:
        return f"(1:{right / left})"
    return "(0:1)" if right else "(0:0)"


def _pencil_class(A: Algebra, subs: dict[str, Subspace]) -> str | None:
    """Invariant of the product U x U -> A^2 when dim A/A^2 = dim A^2 = 2 and A^3 = 0.

    For f in (A^2)* the form f(xy) has determinant D(f) and antisymmetric
    part k(f); D and k^2 are binary quadratics whose joint invariants survive
    every basis change of U and of A^2.
    """
    sq = subs.get("A^2")
    if sq is None or sq.dim != 2 or A.dim - sq.dim != 2 or subs.get("A^3", sq).dim != 0:
        return None
    zero = CycloScalar((), A.order)
    piv = sq.pivots()
    keep = [i for i in range(A.dim) if i not in piv]
    # M[r][a][b] = coordinate r (on the row basis of A^2) of u_a u_b
    M = [[[A.basis_product(i, j).get(p, zero) for j in keep] for i in keep] for p in piv]

    def det(m):
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]

    both = [[M[0][a][b] + M[1][a][b] for b in range(2)] for a in range(2)]
    d0, d2 = det(M[0]), det(M[1])
    quad = (d0, det(both) - d0 - d2, d2)
    k = [m[0][1] - m[1][0] for m in M]
    ksq = (k[0] * k[0], 2 * k[0] * k[1], k[1] * k[1])
    disc = quad[1] * quad[1] - 4 * quad[0] * quad[2]
    if not any(k):
        return "sym:" + ("0" if not any(quad) else ("sq" if not disc else "gen"))
    lead = next(i for i in range(3) if ksq[i])
    r = quad[lead] / ksq[lead]
    if all(quad[i] == r * ksq[i] for i in range(3)):
        return f"prop:{r}"
    joint = 2 * quad[0] * ksq[2] - quad[1] * ksq[1] + 2 * quad[2] * ksq[0]
    return f"joint:{disc / joint}" if joint else "joint:inf"


@dataclass
class Fingerprint:
    dim: int
    commutative: bool
    power_dims: tuple
    kernel_dim: int
    center_dim: int
    subspace_dims: dict = field(default_factory=dict)
    form_class: str | None = None
    pencil: str | None = None
    orientation: str | None = None
    cohomology: tuple | None = None

    def fields(self) -> dict:
        out = {
            "dim": self.dim,
            "commutative": self.commutative,
            "power_dims": self.power_dims,
            "kernel_dim": self.kernel_dim,
            "center_dim": self.center_dim,
        }
        for k, v in self.subspace_dims.items():
            out[f"dim {k}"] = v
        out["form_class"] = self.form_class
        out["pencil"] = self.pencil
        out["orientation"] = self.orientation
        if self.cohomology is not None:
            for i, h in enumerate(self.cohomology):
                out[f"h{i}"] = h
        return out

    def diff(self, other: Fingerprint) -> dict:
        a, b = self.fields(), other.fields()
        return {k: (a[k], b[k]) for k in a if k in b and a[k] != b[k]}

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.fields().items()}


def fingerprint(A: Algebra, cohomology: bool = False) -> Fingerprint:
    subs = characteristic_subspaces(A)
    chain = power_subspaces(A)
    fp = Fingerprint(
        dim=A.dim,
        commutative=is_commutative(A),
        power_dims=tuple(s.dim for s in chain),
        kernel_dim=subs["ann"].dim,
        center_dim=subs["center"].dim,
        subspace_dims={k: v.dim for k, v in subs.items() if not k.startswith("A^") and k not in ("ann", "center")},
        form_class=_form_class(A, subs),
        pencil=_pencil_class(A, subs),
        orientation=_orientation(A, subs),
    )
    if cohomology:
        from .hochschild import cohomology_dims

        fp.cohomology = tuple(cohomology_dims(A, 3).dims)
    return fp


def verify_iso(A: Algebra, B: Algebra, g: ExactMatrix) -> bool:
    """Exact gate: g invertible and g^-1 A(g x, g y) = B(x, y)."""
    if A.dim != B.dim or g.shape != (A.dim, A.dim):
        return False
    if not g.is_invertible():
        return False
    return change_of_basis(A, g) == B


def _constraint_space(A: Algebra, B: Algebra, subsA: dict, subsB: dict) -> list[dict]:
    """Basis of linear maps g with g(U_B) inside U_A for every characteristic pair."""
    n = A.dim
    eqs = []
    for name, UB in subsB.items():
        UA = subsA[name]
        if UA.dim == n:
            continue
        phis = UA.equations()
        for u in UB.rows:
            for phi in phis:
                row = {}
                for r, pv in phi.items():
                    for c, uv in u.items():
                        key = r * n + c
                        nv = row.get(key, 0) + pv * uv
                        if nv:
                            row[key] = nv
                        else:
                            row.pop(key, None)
                if row:
                    eqs.append(row)
    return kernel_basis(eqs, n * n, A.order)


def _tensor(A: Algebra) -> np.ndarray:
    n = A.dim
    T = np.zeros((n, n, n), dtype=complex)
    for (i, j, k), v in A.c.items():
        T[i, j, k] = complex(v)
    return T


def _transport_system(A: Algebra, B: Algebra, basis: list[dict]) -> ComplexSystem:
    n = A.dim
    nt = len(basis)
    G = np.zeros((n * n, nt), dtype=complex)
    for k, vec in enumerate(basis):
        for idx, v in vec.items():
            G[idx, k] = complex(v)
    cA, cB = _tensor(A), _tensor(B)

    def gmat(z):
        return (G @ z[:nt]).reshape(n, n)

    def residual(z):
        g = gmat(z)
        E = np.einsum("abk,ai,bj->ijk", cA, g, g) - np.einsum("ijl,kl->ijk", cB, g)
        return np.concatenate([E.ravel(), [np.linalg.det(g) * z[nt] - 1]])

    def jacobian(z):
        g = gmat(z)
        Jg = np.zeros((n, n, n, n, n), dtype=complex)  # [i, j, k, p, q]
        X = np.einsum("pbk,bj->pjk", cA, g)
        Y = np.einsum("apk,ai->ipk", cA, g)
        for q in range(n):
            # d/dg[p,q] of sum cA[a,b,k] g[a,i] g[b,j]
            for p in range(n):
                Jg[q, :, :, p, q] += X[p]          # i = q
                Jg[:, q, :, p, q] += Y[:, p, :]    # j = q
                Jg[:, :, p, p, q] -= cB[:, :, q]   # k = p
        Jt = Jg.reshape(n ** 3, n * n) @ G
        det = np.linalg.det(g)
        cof = np.array([[_cofactor(g, p, q) for q in range(n)] for p in range(n)])
        drow = np.concatenate([(cof.reshape(n * n) @ G) * z[nt], [det]])
        J = np.zeros((n ** 3 + 1, nt + 1), dtype=complex)
        J[: n ** 3, :nt] = Jt
        J[n ** 3] = drow
        return J

    return ComplexSystem(nt + 1, nt, residual, jacobian)


def _cofactor(P: np.ndarray, a: int, b: int) -> complex:
    minor = np.delete(np.delete(P, a, axis=0), b, axis=1)
    return (-1) ** (a + b) * (np.linalg.det(minor) if minor.size else 1.0)


def _search(A: Algebra, B: Algebra, budget: Budget, seed: int, subsA=None, subsB=None) -> ExactMatrix | None:
    subsA = subsA or characteristic_subspaces(A)
    subsB = subsB or characteristic_subspaces(B)
    basis = _constraint_space(A, B, subsA, subsB)
    n = A.dim
    if not basis:
        return None
    system = _transport_system(A, B, basis)
    system.tiers = _column_tiers(B, basis)
    o = A.order

    def build(vals):
        entries = [[CycloScalar((), o)] * n for _ in range(n)]
        for t, vec in zip(vals, basis):
            if not t:
                continue
            for idx, v in vec.items():
                r, c = divmod(idx, n)
                entries[r][c] = entries[r][c] + t * v
        g = ExactMatrix(entries, o)
        return g if verify_iso(A, B, g) else None

    return search_exact(system, build, np.random.default_rng(seed), budget, o)


def _column_tiers(B: Algebra, basis: list[dict]) -> list[int]:
    """Depth in the power filtration of the column each parameter lives in.

    Columns of generators are pinned first; columns inside B^2 are then
    usually forced to products of already pinned values.
    """
    n = B.dim
    chain = power_subspaces(B)
    depth = []
    for c in range(n):
        e = unit(c, B.order)
        d = 1
        for k, S in enumerate(chain[1:], start=2):
            if S.contains(e):
                d = k
        depth.append(d)
    tiers = []
    for vec in basis:
        # the free coordinate of an echelon kernel vector is its largest index
        lead = max(vec)
        tiers.append(depth[lead % n])
    return tiers


def _square_zero_form(A: Algebra, subs: dict[str, Subspace]):
    """(keep, w, M) when dim A^2 = 1 and A^3 = 0, else None.

    keep indexes a coordinate complement of A^2, w spans A^2 and
    e_i e_j = M[j][i] w for i, j in keep.
    """
    sq = subs.get("A^2")
    if sq is None or sq.dim != 1 or "A^3" not in subs or subs["A^3"].dim != 0:
        return None
    w = dict(sq.rows[0])
    piv = min(w)
    keep = [i for i in range(A.dim) if i != piv]
    zero = CycloScalar((), A.order)
    M = [[A.basis_product(i, j).get(piv, zero) / w[piv] for i in keep] for j in keep]
    return keep, w, ExactMatrix(M, A.order)


def _scale_candidates(MA: ExactMatrix, MB: ExactMatrix) -> tuple[list, bool]:
    """Scalars c to try in P^T MA P = c MB, and whether the list is exhaustive.

    det(P)^2 det MA = c^m det MB, so for odd m and nonsingular forms c is fixed
    up to squares, and cogredience is invariant under c -> c s^2.
    """
    m = MA.shape[0]
    o = MA.order
    da, db = MA.det(), MB.det()
    if m % 2 == 1 and da and db:
        return [da / db], True
    cands = []
    for X, Y in ((MA, MB), (MA + MA.T, MB + MB.T)):
        dx, dy = X.det(), Y.det()
        if dx and dy:
            cands.append(dx / dy)
    cands += [CycloScalar.rational(x, o) for x in (1, -1, 2, -2, 3, -3, 6, -6)]
    out = []
    for c in cands:
        if c not in out:
            out.append(c)
    return out, False


def _square_zero_search(A: Algebra, B: Algebra, subsA: dict, subsB: dict, budget: Budget,
                        seed: int) -> tuple[ExactMatrix | None, bool]:
    """Reduce to congruence of the induced forms up to scale.

    Returns (g, refuted); refuted means no scale can work.
    """
    from .bilinear import are_cogredient

    fa, fb = _square_zero_form(A, subsA), _square_zero_form(B, subsB)
    if fa is None or fb is None:
        return None, False
    keepA, wA, MA = fa
    keepB, wB, MB = fb
    n, o = A.dim, A.order
    zero = CycloScalar((), o)
    cands, exhaustive = _scale_candidates(MA, MB)
    refuted = 0
    share = max(1, (budget.total - budget.spent) // len(cands))
    for c in cands:
        if budget.exhausted:
            break
        verdict = are_cogredient(MA, MB.scale(c), budget=min(share, budget.total - budget.spent), seed=seed)
        budget.spent += verdict.spent
        if verdict.is_refuted:
            refuted += 1
            continue
        if not verdict.is_witness:
            continue
        P = verdict.witness
        # g on the basis {e_k : k in keepB} + {wB}, then converted to coordinates
        G = [[zero] * n for _ in range(n)]
        F = [[zero] * n for _ in range(n)]
        for col, k in enumerate(keepB):
            F[k][col] = CycloScalar.rational(1, o)
            for row, a in enumerate(keepA):
                G[a][col] = P[row, col]
        for r, v in wB.items():
            F[r][n - 1] = v
        for r, v in wA.items():
            G[r][n - 1] = v * c
        g = ExactMatrix(G, o) @ ExactMatrix(F, o).inverse()
        if verify_iso(A, B, g):
            return g, False
    return None, exhaustive and refuted == len(cands)


def _permutation_witness(A: Algebra, B: Algebra) -> ExactMatrix | None:
    n = A.dim
    if n > 5:
        return None
    for perm in permutations(range(n)):
        g = ExactMatrix([[1 if perm[c] == r else 0 for c in range(n)] for r in range(n)], A.order)
        if change_of_basis(A, g) == B:
            return g
    return None


def are_isomorphic(A: Algebra, B: Algebra, budget: int = DEFAULT_BUDGET, seed: int = 0,
                   thorough: bool = False) -> IsoVerdict:
    """Witness (exactly verified g with g^-1 A(gx, gy) = B(x, y)), Refuted, or Inconclusive."""
    if A.dim != B.dim:
        return Refuted({"dim": (A.dim, B.dim)})
    n = A.dim
    if A == B:
        return Witness(ExactMatrix.identity(n, A.order))
    fa, fb = fingerprint(A, cohomology=thorough), fingerprint(B, cohomology=thorough)
    diff = fa.diff(fb)
    if diff:
        return Refuted(diff)
    g = _permutation_witness(A, B)
    if g is not None:
        return Witness(g)
    subsA, subsB = characteristic_subspaces(A), characteristic_subspaces(B)
    pre = Budget(max(1, budget // 2))
    g, refuted = _square_zero_search(A, B, subsA, subsB, pre, seed)
    if g is not None:
        return Witness(g, spent=pre.spent)
    if refuted:
        return Refuted({"square-zero form up to scale": ("not congruent", "")},
                       note="induced forms on A/A^2 are not congruent for the forced scale")
    budget = max(2, budget - pre.spent)
    half = Budget(max(1, budget // 2))
    g = _search(A, B, half, seed, subsA, subsB)
    spent = half.spent + pre.spent
    if g is not None:
        return Witness(g, spent=spent)
    rest = Budget(max(1, budget - spent))
    h = _search(B, A, rest, seed + 1, subsB, subsA)
    spent += rest.spent
    if h is not None:
        g = h.inverse()
        if verify_iso(A, B, g):
            return Witness(g, spent=spent)
    return Inconclusive(spent)
