from __future__ import annotations

import cmath
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from nilstrata.cyclo import CycloScalar, cyclo_eval
from nilstrata.expr import ExprError
from nilstrata.linalg import ExactMatrix, kernel_basis, mat_rank, solve_linear

Z = CycloScalar.zeta()
ONE = CycloScalar.rational(1)

small = st.fractions(min_value=-5, max_value=5, max_denominator=6)
scalars = st.lists(small, min_size=8, max_size=8).map(lambda cs: CycloScalar(cs))


def as_complex(x: CycloScalar) -> complex:
    w = cmath.exp(2j * cmath.pi / x.order)
    return sum(complex(c) * w**k for k, c in enumerate(x.coeffs))


def int_matrices(n: int, m: int):
    return st.lists(st.lists(st.integers(-3, 3), min_size=m, max_size=m), min_size=n, max_size=n)


# --- scalars -------------------------------------------------------------------

def test_zeta_order_and_sixth_root():
    assert cyclo_eval("z^24") == ONE
    assert cyclo_eval("z^12") == -ONE
    assert cyclo_eval("z^6 * z^6") == -ONE
    g = cyclo_eval("z^4")
    assert g**6 == ONE and g**2 != ONE and g**3 != ONE
    assert g * g - g + 1 == 0


def test_sqrt2_lives_in_the_field():
    r = cyclo_eval("z^3 + z^21")
    assert r * r == CycloScalar.rational(2)


def test_parser_rejects_bad_input():
    with pytest.raises(ExprError):
        cyclo_eval("1/(z^12+1)")
    with pytest.raises(ExprError):
        cyclo_eval("2 +* 3")


@given(scalars, scalars, scalars)
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    if not a.is_zero():
        assert a * a.inverse() == ONE


@given(scalars, scalars)
def test_arithmetic_matches_complex_embedding(a, b):
    assert abs(as_complex(a * b) - as_complex(a) * as_complex(b)) < 1e-8
    assert abs(as_complex(a + b) - as_complex(a) - as_complex(b)) < 1e-8


def test_representation_is_canonical():
    # z^8 = z^4 - 1 in Q(zeta_24), so both spellings give equal coefficient tuples
    assert cyclo_eval("z^8").coeffs == cyclo_eval("z^4 - 1").coeffs
    assert hash(cyclo_eval("z^8")) == hash(cyclo_eval("z^4 - 1"))
    assert CycloScalar.rational(Fraction(3, 4)).coeffs[1:] == (0,) * 7


# --- matrices ------------------------------------------------------------------

def test_rank_examples():
    assert ExactMatrix.identity(3).rank() == 3
    assert ExactMatrix.zeros(5, 7).rank() == 0
    g = cyclo_eval("z^4")
    assert ExactMatrix([[1, g], [g.inverse(), 1]]).rank() == 1


def test_kernel_examples():
    assert kernel_basis(ExactMatrix.identity(3).sparse_rows(), 3) == []
    assert len(kernel_basis([], 3)) == 3
    (v,) = kernel_basis([{0: 1, 1: 1}], 2)
    assert v[0] + v[1] == 0 and not v[0].is_zero()


def test_solve_examples():
    b = [CycloScalar.rational(x) for x in (2, -1, 5)]
    sol = solve_linear(ExactMatrix.identity(3).sparse_rows(), b, 3)
    assert [sol.get(i, 0) for i in range(3)] == b
    assert solve_linear([{}], [1], 2) is None
    sol = solve_linear([{0: 1, 1: 1}], [2], 2)
    assert sol.get(0, 0) + sol.get(1, 0) == 2


@given(int_matrices(4, 5))
def test_rank_matches_sympy(rows):
    assert ExactMatrix(rows).rank() == sympy.Matrix(rows).rank()


@given(int_matrices(4, 4), int_matrices(4, 4), int_matrices(4, 4))
def test_rank_is_transpose_and_equivalence_invariant(m, p, q):
    M, P, Q = ExactMatrix(m), ExactMatrix(p), ExactMatrix(q)
    assert M.rank() == M.T.rank()
    if P.is_invertible() and Q.is_invertible():
        assert (P @ M @ Q).rank() == M.rank()


@given(int_matrices(3, 5), st.integers(0, 7))
def test_kernel_vectors_annihilate(rows, k):
    zk = Z**k
    M = ExactMatrix([[zk * x if i == 0 else x for i, x in enumerate(r)] for r in rows])
    basis = kernel_basis(M.sparse_rows(), 5)
    assert len(basis) == 5 - mat_rank(M.sparse_rows())
    for v in basis:
        for r in M.rows:
            assert sum((r[j] * v.get(j, 0) for j in range(5)), CycloScalar.rational(0)).is_zero()


@given(int_matrices(3, 3), st.integers(0, 7))
def test_cyclotomic_rank_matches_numeric_oracle(rows, k):
    zk = Z**k
    M = ExactMatrix([[x * zk**(i + j) for j, x in enumerate(r)] for i, r in enumerate(rows)])
    assert M.rank() == np.linalg.matrix_rank(M.to_complex(), tol=1e-9)
