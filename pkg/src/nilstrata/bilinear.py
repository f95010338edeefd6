"""Bilinear forms on 2- and 3-dimensional spaces up to cogredience (P^T B P).

Matrix convention: B[j][i] = beta(e_i, e_j), so beta(x, y) = y^T B x.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cyclo import DEFAULT_ORDER, CycloScalar
from .linalg import ExactMatrix, kernel_basis
from .search import Budget, ComplexSystem, converged, search_exact, solve_pinned
from .verdict import Inconclusive, IsoVerdict, Refuted, Witness


def _s(x, order=DEFAULT_ORDER) -> CycloScalar:
    return CycloScalar.coerce(x, order)


def beta(B: ExactMatrix, x, y):
    n = B.shape[0]
    total = _s(0, B.order)
    for j in range(n):
        if not y[j]:
            continue
        for i in range(n):
            if x[i] and B.rows[j][i]:
                total = total + y[j] * B.rows[j][i] * x[i]
    return total


def congruent(B: ExactMatrix, P: ExactMatrix) -> ExactMatrix:
    return P.T @ B @ P


def from_columns(cols, order: int = DEFAULT_ORDER) -> ExactMatrix:
    n = len(cols)
    return ExactMatrix([[cols[j][i] for j in range(n)] for i in range(n)], order)


# --- canonical matrices --------------------------------------------------------

def form_B(p, q, order: int = DEFAULT_ORDER) -> ExactMatrix:
    return ExactMatrix([[1, p], [q, 0]], order)


def form_C(order: int = DEFAULT_ORDER) -> ExactMatrix:
    return ExactMatrix([[0, 1], [-1, 0]], order)


def form3(tag: str, p=None, q=None, order: int = DEFAULT_ORDER) -> ExactMatrix:
    rows = {
        "B1": [[1, 0, 0], [0, 1, p], [0, q, 0]],
        "B2": [[0, 0, 0], [0, 1, p], [0, q, 0]],
        "B3": [[1, 0, 0], [0, 0, 1], [0, -1, 0]],
        "B4": [[0, 0, 0], [0, 0, 1], [0, -1, 0]],
        "B5": [[0, 1, 0], [0, 0, 1], [0, -1, 0]],
        "B6": [[1, 1, 0], [0, 1, 1], [0, 1, 0]],
        "C1": [[0, 0, q], [0, 1, 1], [p, 0, 1]],
        "C2": [[0, 0, q], [0, 0, 0], [p, 0, 1]],
        "C3": [[0, 1, 0], [-1, 0, 0], [0, 0, 1]],
        "C4": [[0, 1, 1], [-1, 0, 0], [0, 0, 0]],
        "C5": [[0, 1, 0], [1, 1, 0], [0, 0, 1]],
        "C6": [[0, 1, 0], [-1, 0, 0], [0, 0, 0]],
        "Zero": [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
    }[tag]
    return ExactMatrix(rows, order)


# --- projective parameters -----------------------------------------------------

def normalize_pair(p, q, order: int = DEFAULT_ORDER) -> tuple[CycloScalar, CycloScalar]:
    p, q = _s(p, order), _s(q, order)
    if p:
        return _s(1, order), q / p
    if q:
        return p, _s(1, order)
    return p, q


def sigma2_reduce(p, q, order: int = DEFAULT_ORDER) -> tuple[CycloScalar, CycloScalar]:
    a = normalize_pair(p, q, order)
    b = normalize_pair(q, p, order)
    key = lambda t: (t[0].sort_key(), t[1].sort_key())
    return min(a, b, key=key)


def pair_text(pq) -> str:
    if pq is None:
        return "?"
    return f"({pq[0]}:{pq[1]})".replace(" ", "")


def _pair_from_trace(t: CycloScalar, order: int):
    """(1:q) with q + 1/q = t, Sigma2-reduced; None when the root is not in the field."""
    disc = (t * t - 4).sqrt()
    if disc is None:
        return None
    q = (t + disc) / 2
    return sigma2_reduce(1, q, order)


# --- 2x2 -----------------------------------------------------------------------

@dataclass
class FormClass2:
    tag: str
    params: tuple | None = None
    trace_invariant: CycloScalar | None = None
    witness: ExactMatrix | None = None
    note: str = ""

    @property
    def key(self):
        if self.tag == "B" and self.trace_invariant is not None:
            return ("B", "t", self.trace_invariant)
        return (self.tag, self.params)

    def matrix(self, order: int = DEFAULT_ORDER) -> ExactMatrix | None:
        if self.tag == "Zero":
            return ExactMatrix.zeros(2, order=order)
        if self.tag == "C":
            return form_C(order)
        if self.params is None:
            return None
        return form_B(*self.params, order)

    def label(self) -> str:
        if self.tag == "B":
            return "B" + pair_text(self.params) if self.params else f"B(t={self.trace_invariant})"
        return self.tag


def _vec_add(x, y, a=1):
    return [xi + a * yi for xi, yi in zip(x, y)]


def _vec_scale(x, a):
    return [xi * a for xi in x]


def _checked(B: ExactMatrix, P: ExactMatrix | None, target: ExactMatrix | None) -> ExactMatrix | None:
    if P is None or target is None:
        return None
    if not P.is_invertible() or congruent(B, P) != target:
        raise AssertionError("internal error: cogredience witness failed exact verification")
    return P


def canon2(B: ExactMatrix) -> FormClass2:
    """Class of a 2x2 form with an exact witness P (P^T B P canonical) when one exists in the field."""
    if B.shape != (2, 2):
        raise ValueError("canon2 needs a 2x2 matrix")
    o = B.order
    e1, e2 = [_s(1, o), _s(0, o)], [_s(0, o), _s(1, o)]
    rank = B.rank()
    if rank == 0:
        return FormClass2("Zero", witness=ExactMatrix.identity(2, o))
    sym = B == B.T
    alternating = all(not B.rows[i][i] for i in range(2)) and B + B.T == ExactMatrix.zeros(2, order=o)
    if alternating:
        a = B.rows[0][1]
        P = ExactMatrix([[1, 0], [0, a.inverse()]], o)
        return FormClass2("C", witness=_checked(B, P, form_C(o)))
    if rank == 1:
        if sym:
            u0 = next(v for v in (e1, e2, _vec_add(e1, e2)) if beta(B, v, v))
            a = beta(B, u0, u0)
            w = [_s(x, o) for x in _kernel_vec(B)]
            r = a.sqrt()
            P = from_columns([_vec_scale(u0, r.inverse()), w], o) if r is not None else None
            target = form_B(0, 0, o)
            note = "" if P is not None else f"square root of {a} not in the field"
            return FormClass2("B", (_s(0, o), _s(0, o)), witness=_checked(B, P, target), note=note)
        # B = r s^T, beta(x, y) = (r.y)(s.x)
        i0, j0 = next((i, j) for i in range(2) for j in range(2) if B.rows[i][j])
        r = [B.rows[i][j0] for i in range(2)]
        s = [B.rows[i0][j] / B.rows[i0][j0] for j in range(2)]
        params = sigma2_reduce(1, 0, o)
        # target B(p:q): beta(u,u)=1, beta(w,u)=p, beta(u,w)=q, beta(w,w)=0
        p, q = params
        M = ExactMatrix([r, s], o)
        Minv = M.inverse()
        u = [Minv.rows[i][0] + Minv.rows[i][1] for i in range(2)]  # r.u = s.u = 1
        if p:  # s.w = 1, r.w = 0
            w = [Minv.rows[i][1] for i in range(2)]
        else:  # r.w = 1, s.w = 0
            w = [Minv.rows[i][0] for i in range(2)]
        P = from_columns([u, w], o)
        return FormClass2("B", params, witness=_checked(B, P, form_B(p, q, o)))
    # nonsingular, not alternating
    cos = B.T.inverse() @ B
    t = cos.rows[0][0] + cos.rows[1][1]
    params = _pair_from_trace(t, o)
    P, note = _witness_nonsingular(B, params)
    target = form_B(*params, o) if params is not None else None
    if params is None:
        note = "parameter roots of q^2 - t q + 1 lie outside the field"
    return FormClass2("B", params, trace_invariant=t, witness=_checked(B, P, target), note=note)


def _kernel_vec(B: ExactMatrix):
    ker = kernel_basis(B.sparse_rows(), B.shape[1], B.order)
    v = ker[0]
    return [v.get(i, 0) for i in range(B.shape[1])]


def _witness_nonsingular(B: ExactMatrix, params):
    o = B.order
    if params is None:
        return None, ""
    e1, e2 = [_s(1, o), _s(0, o)], [_s(0, o), _s(1, o)]
    u0 = next(v for v in (e1, e2, _vec_add(e1, e2)) if beta(B, v, v))
    v0 = e2 if u0 is e1 else e1
    a = beta(B, u0, u0)
    d = beta(B, v0, v0)
    bc = beta(B, u0, v0) + beta(B, v0, u0)
    if not d:
        w = v0
    else:
        root = (bc * bc - a * d * 4).sqrt()
        if root is None:
            return None, "isotropic vector needs a square root outside the field"
        x = (-bc + root) / (d * 2)
        w = _vec_add(u0, v0, x)
    xs, ys = beta(B, u0, w), beta(B, w, u0)
    if xs + ys:
        z = (1 - a) / (xs + ys)
        u = _vec_add(u0, w, z)
    else:
        r = a.sqrt()
        if r is None:
            return None, f"square root of {a} not in the field"
        u = _vec_scale(u0, r.inverse())
    # basis (u, w) gives B(beta(w,u) : beta(u,w)); rescale w so the first entry is 1
    p_now = beta(B, w, u)
    w = _vec_scale(w, p_now.inverse())
    q_now = beta(B, u, w)
    if q_now != params[1]:
        # swap (1:q) -> (q:1) then rescale
        w = _vec_add(_vec_scale(u, 1 + q_now), w, -1)
        w = _vec_scale(w, q_now.inverse())
    return from_columns([u, w], o), ""


# --- 3x3 -----------------------------------------------------------------------

@dataclass
class FormClass3:
    tag: str
    params: tuple | None = None
    trace_invariant: CycloScalar | None = None
    alt_tag: str | None = None
    alt_params: tuple | None = None
    witness: ExactMatrix | None = None
    exact_path: bool = False
    invariants: dict = field(default_factory=dict)
    note: str = ""

    @property
    def key(self):
        if self.tag == "B1" and self.trace_invariant is not None:
            return ("B1", "t", self.trace_invariant)
        return (self.tag, self.params)

    def matrix(self, order: int = DEFAULT_ORDER) -> ExactMatrix | None:
        if self.tag in ("B1", "B2"):
            if self.params is None:
                return None
            return form3(self.tag, *self.params, order=order)
        return form3(self.tag, order=order)

    def label(self) -> str:
        if self.tag in ("B1", "B2"):
            return self.tag + pair_text(self.params)
        return self.tag

    def alt_label(self) -> str | None:
        if self.alt_tag is None:
            return None
        if self.alt_tag in ("C1", "C2"):
            return self.alt_tag + pair_text(self.alt_params)
        return self.alt_tag


def common_radical(B: ExactMatrix) -> list[dict]:
    rows = B.sparse_rows() + B.T.sparse_rows()
    return kernel_basis(rows, B.shape[1], B.order)


def charpoly(M: ExactMatrix) -> tuple[CycloScalar, ...]:
    """Coefficients c_0..c_n of det(lambda I - M), leading coefficient last (Faddeev-LeVerrier)."""
    n = M.shape[0]
    o = M.order
    I = ExactMatrix.identity(n, o)
    coeffs = [None] * (n + 1)
    coeffs[n] = _s(1, o)
    Mk = ExactMatrix.zeros(n, order=o)
    for k in range(1, n + 1):
        Mk = M @ Mk + I.scale(coeffs[n - k + 1])
        prod = M @ Mk
        tr = sum((prod.rows[i][i] for i in range(n)), _s(0, o))
        coeffs[n - k] = -tr / k
    return tuple(coeffs)


def form_invariants(B: ExactMatrix) -> dict:
    inv = {
        "rank": B.rank(),
        "rank_sym": (B + B.T).rank(),
        "rank_alt": (B - B.T).rank(),
        "common_radical_dim": len(common_radical(B)),
    }
    if inv["rank"] == B.shape[0]:
        inv["cosquare_charpoly"] = tuple(str(c) for c in charpoly(B.T.inverse() @ B))
    return inv


def _classify3(B: ExactMatrix) -> tuple[str, tuple | None, CycloScalar | None, ExactMatrix | None, str]:
    o = B.order
    K = common_radical(B)
    k = len(K)
    if k == 3:
        return "Zero", None, None, ExactMatrix.identity(3, o), ""
    keep, kvecs = _complement(K, o)
    Q = ExactMatrix([[B.rows[i][j] for j in keep] for i in keep], o)
    if k == 2:
        a = Q.rows[0][0]
        r = a.sqrt()
        note = ""
        P = None
        if r is not None:
            u = [_s(0, o)] * 3
            u[keep[0]] = r.inverse()
            P = from_columns([kvecs[0], u, kvecs[1]], o)
        else:
            note = f"square root of {a} not in the field"
        return "B2", (_s(0, o), _s(0, o)), None, P, note
    if k == 1:
        c2 = canon2(Q)
        P = None
        if c2.witness is not None:
            cols = []
            for j in range(2):
                v = [_s(0, o)] * 3
                for a_, idx in enumerate(keep):
                    v[idx] = c2.witness.rows[a_][j]
                cols.append(v)
            P = from_columns([kvecs[0]] + cols, o)
        if c2.tag == "C":
            return "B4", None, None, P, c2.note
        return "B2", c2.params, c2.trace_invariant, P, c2.note
    rank = B.rank()
    sym = B == B.T
    rsym = (B + B.T).rank()
    if rank == 3:
        if sym:
            return "B1", (_s(1, o), _s(1, o)), _s(2, o), None, ""
        cos = B.T.inverse() @ B
        t = cos.rows[0][0] + cos.rows[1][1] + cos.rows[2][2] - 1
        if t == -2:
            if rsym == 1:
                return "B3", None, None, None, ""
            return "B1", (_s(1, o), _s(-1, o)), t, None, ""
        if t == 2:
            return "B6", None, None, None, ""
        params = _pair_from_trace(t, o)
        note = "" if params is not None else "parameter roots lie outside the field"
        return "B1", params, t, None, note
    if rsym == 3:
        return "B1", sigma2_reduce(1, 0, o), None, None, ""
    return "B5", None, None, None, ""


def _complement(K: list[dict], o: int):
    from .algebra import Subspace

    S = Subspace(3, K, o)
    piv = set(S.pivots())
    keep = [i for i in range(3) if i not in piv]
    kvecs = [[r.get(i, _s(0, o)) for i in range(3)] for r in S.rows]
    return keep, kvecs


def canon3(B: ExactMatrix, search_budget: int = 0, seed: int = 0) -> FormClass3:
    """Class of a 3x3 form decided by exact invariants.

    Cases with a common radical get a constructive exact witness; otherwise,
    when search_budget > 0, the witness comes from the seeded numeric search
    and is exactly verified.
    """
    if B.shape != (3, 3):
        raise ValueError("canon3 needs a 3x3 matrix")
    tag, params, t, P, note = _classify3(B)
    cls = FormClass3(tag, params, t, invariants=form_invariants(B), note=note)
    target = cls.matrix(B.order)
    if P is not None and target is not None:
        cls.witness = _checked(B, P, target)
        cls.exact_path = True
    elif search_budget > 0 and target is not None:
        v = are_cogredient(target, B, budget=search_budget, seed=seed, _skip_classify=True)
        if v.is_witness:
            # v.witness W: W^T target W = B, so P = W^-1 maps B to the target
            cls.witness = _checked(B, v.witness.inverse(), target)
    cls.alt_tag, cls.alt_params = _alternate(cls)
    return cls


def _alternate(cls: FormClass3):
    """Matching member of the second list, decided by comparing invariant classes."""
    if cls.tag == "Zero":
        return None, None
    cands = [("C3", None), ("C4", None), ("C5", None), ("C6", None)]
    if cls.params is not None:
        cands = [("C1", cls.params), ("C2", cls.params)] + cands
    cands.append(("C1", (1, 1)))
    for ctag, pq in cands:
        M = form3(ctag, *(pq or (None, None)))
        other = _classify3(M)
        okey = ("B1", "t", other[2]) if other[0] == "B1" and other[2] is not None else (other[0], other[1])
        if okey == cls.key:
            return ctag, tuple(_s(x) for x in pq) if pq else None
    return None, None


# --- congruence decision ---------------------------------------------------------

def _congruence_system(B: np.ndarray, C: np.ndarray) -> ComplexSystem:
    n = B.shape[0]
    nv = n * n

    def residual(z):
        P = z[:nv].reshape(n, n)
        s = z[nv]
        R = P.T @ B @ P - C
        return np.concatenate([R.ravel(), [np.linalg.det(P) * s - 1]])

    def jacobian(z):
        P = z[:nv].reshape(n, n)
        s = z[nv]
        BP = B @ P
        PtB = P.T @ B
        J = np.zeros((nv + 1, nv + 1), dtype=complex)
        for a in range(n):
            for b in range(n):
                col = a * n + b
                D = np.zeros((n, n), dtype=complex)
                D[b, :] += BP[a, :]
                D[:, b] += PtB[:, a]
                J[:nv, col] = D.ravel()
                J[nv, col] = _cofactor(P, a, b) * s
        J[nv, nv] = np.linalg.det(P)
        return J

    return ComplexSystem(nv + 1, nv, residual, jacobian)


def _cofactor(P: np.ndarray, a: int, b: int) -> complex:
    minor = np.delete(np.delete(P, a, axis=0), b, axis=1)
    return (-1) ** (a + b) * (np.linalg.det(minor) if minor.size else 1.0)


def congruence_numeric_search(B: ExactMatrix, C: ExactMatrix, budget: int = 50, seed: int = 0):
    """Approximate P with P^T B P = C, or None. Never used as an answer on its own."""
    if B.shape != C.shape:
        raise ValueError("size mismatch")
    system = _congruence_system(B.to_complex(), C.to_complex())
    rng = np.random.default_rng(seed)
    n = B.shape[0]
    for _ in range(budget):
        z0 = rng.normal(size=system.nvars) + 1j * rng.normal(size=system.nvars)
        z, res = solve_pinned(system, z0, {})
        if converged(system, z, res):
            return z[: n * n].reshape(n, n)
    return None


def are_cogredient(B: ExactMatrix, C: ExactMatrix, budget: int = 200, seed: int = 0,
                   _skip_classify: bool = False) -> IsoVerdict:
    """Witness P with P^T B P = C, an invariant refutation, or Inconclusive."""
    if B.shape != C.shape or B.shape[0] != B.shape[1]:
        raise ValueError("cogredience needs square matrices of the same size")
    n = B.shape[0]
    ib, ic = form_invariants(B), form_invariants(C)
    diff = {k: (ib[k], ic[k]) for k in ib if k in ic and ib[k] != ic[k]}
    if diff:
        return Refuted(diff)
    if n == 2:
        cb, cc = canon2(B), canon2(C)
        if cb.key != cc.key:
            return Refuted({"canon2 class": (cb.label(), cc.label())})
        if cb.witness is not None and cc.witness is not None:
            P = cb.witness @ cc.witness.inverse()
            if congruent(B, P) == C:
                return Witness(P)
    elif n == 3 and not _skip_classify:
        kb, kc = _classify3(B), _classify3(C)
        keyb = ("B1", "t", kb[2]) if kb[0] == "B1" and kb[2] is not None else (kb[0], kb[1])
        keyc = ("B1", "t", kc[2]) if kc[0] == "B1" and kc[2] is not None else (kc[0], kc[1])
        if keyb != keyc:
            return Refuted({"canon3 class": (_label3(kb), _label3(kc))})
        if kb[3] is not None and kc[3] is not None:
            P = kb[3] @ kc[3].inverse()
            if congruent(B, P) == C:
                return Witness(P)
    o = B.order
    system = _congruence_system(B.to_complex(), C.to_complex())
    bud = Budget(budget)

    def build(vals):
        P = ExactMatrix([vals[i * n:(i + 1) * n] for i in range(n)], o)
        if P.is_invertible() and congruent(B, P) == C:
            return P
        return None

    P = search_exact(system, build, np.random.default_rng(seed), bud, o)
    if P is not None:
        return Witness(P, spent=bud.spent)
    return Inconclusive(bud.spent)


def _label3(k) -> str:
    tag, params = k[0], k[1]
    if tag in ("B1", "B2"):
        return tag + (pair_text(params) if params else f"(t={k[2]})")
    return tag


def parse_form(text: str, order: int = DEFAULT_ORDER) -> ExactMatrix:
    return ExactMatrix.parse(text, order)
