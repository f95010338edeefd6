from __future__ import annotations

from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilstrata.algebra import Algebra, change_of_basis, is_associative, parse_structure, zero_algebra
from nilstrata.catalog import load_catalog
from nilstrata.deformations import h2_data_of
from nilstrata.hochschild import (ArityError, Cochain, basis_cochain, cohomology_dims, differential,
                                  differential_matrix, gbracket, is_coboundary, is_cocycle, represents_basis)
from nilstrata.linalg import ExactMatrix

CAT = load_catalog()
CATALOG_REFS = ["d19", "d20(2:3)", "d21", "d73", "d74", "d75(1:1)", "d75(2:3)", "d76", "d77", "d78(1:2)",
                "d79", "d80", "d81", "d82", "d83(1:0)", "d84", "d85", "d86(1:-1)", "d87"]


# --- independent oracle: the classical Hochschild coboundary, evaluated numerically --------

def _tensor(A: Algebra) -> np.ndarray:
    T = np.zeros((A.dim,) * 3)
    for (i, j, k), v in A.c.items():
        T[i, j, k] = float(v.to_fraction())
    return T


def _hochschild_matrix(A: Algebra, n: int) -> np.ndarray:
    """(delta f)(a0..an) = a0 f(a1..) + sum (-1)^(i+1) f(..a_i a_{i+1}..) + (-1)^(n+1) f(..) a_n."""
    d, T = A.dim, _tensor(A)
    ins_n = list(product(range(d), repeat=n))
    ins_n1 = list(product(range(d), repeat=n + 1))
    col = {(k, ins): c for c, (k, ins) in enumerate(product(range(d), ins_n))}
    M = np.zeros((d * len(ins_n1), len(col)))
    for r, (l, a) in enumerate(product(range(d), ins_n1)):
        for k in range(d):
            if T[a[0], k, l]:
                M[r, col[(k, a[1:])]] += T[a[0], k, l]
            if T[k, a[-1], l]:
                M[r, col[(k, a[:-1])]] += (-1) ** (n + 1) * T[k, a[-1], l]
        for i in range(n):
            for m in range(d):
                if T[a[i], a[i + 1], m]:
                    M[r, col[(l, a[:i] + (m,) + a[i + 2:])]] += (-1) ** (i + 1) * T[a[i], a[i + 1], m]
    return M


def oracle_cohomology(A: Algebra, nmax: int) -> tuple[int, ...]:
    ranks = [np.linalg.matrix_rank(_hochschild_matrix(A, n), tol=1e-8) if n >= 0 else 0
             for n in range(nmax + 1)]
    return tuple(A.dim ** (n + 1) - ranks[n] - (ranks[n - 1] if n else 0) for n in range(nmax + 1))


@pytest.mark.parametrize("ref", ["d21", "d73", "d80", "d83(1:0)", "d86(2:3)", "d87"])
def test_cohomology_matches_bar_complex_oracle(ref):
    A = CAT.algebra(ref)
    assert cohomology_dims(A, 2).dims == oracle_cohomology(A, 2)


def test_cohomology_examples():
    assert cohomology_dims(zero_algebra(4)).dims == (4, 16, 64, 256)
    assert cohomology_dims(CAT.algebra("d87")).dims == (2, 8, 17, 42)
    assert cohomology_dims(CAT.algebra("d73")).dims == (2, 2, 3, 4)


def test_differential_examples():
    assert differential_matrix(zero_algebra(3), 1).rank() == 0
    assert differential_matrix(CAT.algebra("d87"), 0).rank() == 2
    A = CAT.algebra("d73")
    assert (differential_matrix(A, 1) @ differential_matrix(A, 0)).rank() == 0


def test_bracket_with_a_vector():
    # [d, v](a) = d(v, a) - d(a, v)
    A = CAT.algebra("d21")
    v = Cochain(0, 3, {(0, ()): 1})
    D = differential(A, v)
    for a in range(3):
        want = {}
        for k, c in A.basis_product(0, a).items():
            want[k] = want.get(k, 0) + c
        for k, c in A.basis_product(a, 0).items():
            want[k] = want.get(k, 0) - c
        got = {k: v for (k, ins), v in D.terms.items() if ins == (a,)}
        assert got == {k: c for k, c in want.items() if c}


@pytest.mark.parametrize("ref", CATALOG_REFS)
def test_differential_squares_to_zero(ref):
    A = CAT.algebra(ref)
    d = Cochain.from_algebra(A)
    assert gbracket(d, d).is_zero()
    for n in range(3):
        for idx in range(A.dim ** (n + 1)):
            phi = basis_cochain(idx, n, A.dim)
            assert differential(A, differential(A, phi)).is_zero()


# --- bracket identities on random small cochains -------------------------------------------

def cochains(arity: int, dim: int = 2):
    keys = list(product(range(dim), product(range(dim), repeat=arity)))
    return st.dictionaries(st.sampled_from(keys), st.integers(-3, 3), max_size=4).map(
        lambda t: Cochain(arity, dim, t))


arity_triples = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)).filter(
    lambda t: sum(t) - 2 <= 4 and sum(t) - 2 >= 0 and t[0] + t[1] >= 1 and t[1] + t[2] >= 1 and t[0] + t[2] >= 1)


@given(st.data())
def test_bracket_graded_antisymmetry(data):
    m, n = data.draw(st.integers(0, 3)), data.draw(st.integers(0, 3))
    if m + n - 1 > 4 or m + n == 0:
        return
    phi, psi = data.draw(cochains(m)), data.draw(cochains(n))
    sign = -1 if ((m - 1) * (n - 1)) % 2 == 0 else 1
    assert gbracket(phi, psi) == gbracket(psi, phi).scale(sign)


@given(arity_triples, st.data())
def test_bracket_graded_jacobi(arities, data):
    a, b, c = arities
    x, y, z = data.draw(cochains(a)), data.draw(cochains(b)), data.draw(cochains(c))
    dx, dy = a - 1, b - 1
    lhs = gbracket(x, gbracket(y, z))
    rhs = gbracket(gbracket(x, y), z) + gbracket(y, gbracket(x, z)).scale(-1 if (dx * dy) % 2 else 1)
    assert lhs == rhs


upward_terms = st.lists(
    st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(-2, 2)).filter(lambda t: t[2] != 0),
    max_size=5)


@given(upward_terms)
def test_self_bracket_vanishes_iff_associative(terms):
    c = {}
    for i, j, v in terms:
        if max(i, j) + 1 < 4:
            c[(i, j, max(i, j) + 1)] = c.get((i, j, max(i, j) + 1), 0) + v
    A = Algebra(4, c)
    d = Cochain.from_algebra(A)
    assert gbracket(d, d).is_zero() == is_associative(A)[0]


def test_arity_cap():
    phi = Cochain(3, 2, {(0, (0, 0, 0)): 1})
    with pytest.raises(ArityError):
        gbracket(phi, phi)


invertible = st.lists(st.integers(-2, 2), min_size=16, max_size=16).map(
    lambda xs: ExactMatrix([xs[i:i + 4] for i in range(0, 16, 4)])).filter(lambda g: g.is_invertible())


@settings(max_examples=8)
@given(st.sampled_from(["d73", "d78(1:2)", "d81", "d83(2:3)", "d86(1:0)"]), invertible)
def test_cohomology_is_basis_change_invariant(ref, g):
    A = CAT.algebra(ref)
    assert cohomology_dims(change_of_basis(A, g), 2).dims == cohomology_dims(A, 2).dims


# --- cocycles and bases ---------------------------------------------------------------------

def test_d73_cocycle_data():
    A, (d1, d2, d3) = h2_data_of(CAT["d73"])
    for c in (d1, d2, d3):
        assert is_cocycle(A, c) and not is_coboundary(A, c)
    assert represents_basis(A, [d1, d2, d3])
    assert not represents_basis(A, [d1, d1, d2])
    assert not represents_basis(A, [d1, d1])


@given(st.dictionaries(st.integers(0, 3), st.integers(-3, 3), min_size=1))
def test_coboundaries_of_vectors(vec):
    A = CAT.algebra("d77")
    phi = differential(A, Cochain(0, 4, {(k, ()): v for k, v in vec.items()}))
    assert is_cocycle(A, phi) and is_coboundary(A, phi)


def test_zero_cochain_and_empty_basis():
    A = CAT.algebra("d73")
    z = Cochain.zero(2, 4)
    assert is_cocycle(A, z) and is_coboundary(A, z)
    field = parse_structure("p(1,1;1)", 1)
    assert cohomology_dims(field, 2).dims == (1, 0, 0)
    assert represents_basis(field, [], n=1)
    with pytest.raises(ValueError):
        represents_basis(A, [Cochain(2, 4, {(0, (0, 0)): 1})])
