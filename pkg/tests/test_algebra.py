from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nilstrata.algebra import (Algebra, annihilator_kernel, center, change_of_basis, core_of, direct_sum,
                               is_associative, is_commutative, is_nilpotent, opposite, parse_structure,
                               power_subspace_dims, render, zero_algebra)
from nilstrata.catalog import load_catalog
from nilstrata.expr import ExprError
from nilstrata.linalg import ExactMatrix

CAT = load_catalog()
FOUR_DIM = ["d73", "d74", "d75(2:3)", "d76", "d77", "d78(2:3)", "d79", "d80", "d81", "d82",
            "d83(2:3)", "d84", "d85", "d86(2:3)", "d87"]

invertible = st.lists(st.integers(-2, 2), min_size=16, max_size=16).map(
    lambda xs: ExactMatrix([xs[i:i + 4] for i in range(0, 16, 4)])).filter(lambda g: g.is_invertible())


def tensor(A: Algebra) -> np.ndarray:
    T = np.zeros((A.dim,) * 3, dtype=complex)
    for (i, j, k), v in A.c.items():
        T[i, j, k] = float(v.to_fraction())
    return T


def numeric_associative(A: Algebra) -> bool:
    T = tensor(A)
    left = np.einsum("abk,kcl->abcl", T, T)
    right = np.einsum("bck,akl->abcl", T, T)
    return np.allclose(left, right)


# strictly "upward" products give nilpotent structures that may or may not associate
upward_terms = st.lists(
    st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(-2, 2)).filter(lambda t: t[2] != 0),
    max_size=5)


def upward_algebra(terms) -> Algebra:
    c = {}
    for i, j, v in terms:
        k = max(i, j) + 1
        if k < 4:
            c[(i, j, k)] = c.get((i, j, k), 0) + v
    return Algebra(4, c)


def test_parse_d73():
    A = parse_structure("p(3,1;2)+p(1,3;2)+p(3,3;1)+p(3,4;2)+p(4,4;2)", 4)
    assert len(A.c) == 5 and all(v == 1 for v in A.c.values())
    assert A.c.keys() == {(2, 0, 1), (0, 2, 1), (2, 2, 0), (2, 3, 1), (3, 3, 1)}


def test_parse_empty_and_signs():
    assert parse_structure("", 4) == zero_algebra(4)
    A = parse_structure("-1*p(2,4;1)+p(4,2;1)", 4)
    assert A.c[(1, 3, 0)] == -1 and A.c[(3, 1, 0)] == 1


def test_parse_parameters_and_errors():
    A = parse_structure("p*p(4,2;1) + q*p(2,4;1)", 4, {"p": 2, "q": 3})
    assert A.c[(3, 1, 0)] == 2 and A.c[(1, 3, 0)] == 3
    with pytest.raises(ExprError):
        parse_structure("p(5,1;2)", 4)
    with pytest.raises(ExprError):
        parse_structure("p*p(1,1;2)", 4)
    with pytest.raises(ExprError):
        parse_structure("p(1,1)", 4)


def test_associativity_examples():
    assert is_associative(CAT.algebra("d73"))[0]
    assert is_associative(zero_algebra(3))[0]
    ok, bad = is_associative(parse_structure("p(1,1;2)+p(2,1;1)", 2))
    assert not ok and (1, 1, 1) in bad  # reported 1-based


@given(upward_terms)
def test_associativity_matches_numeric_oracle(terms):
    A = upward_algebra(terms)
    assert is_associative(A)[0] == numeric_associative(A)
    assert is_nilpotent(A)


def test_commutativity_examples():
    assert is_commutative(CAT.algebra("d74"))
    assert not is_commutative(CAT.algebra("d73"))


def test_opposite():
    d74 = CAT.algebra("d74")
    assert opposite(d74) == d74
    assert opposite(CAT.algebra("d86(1:0)")) == CAT.algebra("d86(0:1)")


@given(upward_terms)
def test_opposite_is_an_involution(terms):
    A = upward_algebra(terms)
    assert opposite(opposite(A)) == A


def test_change_of_basis_identity_and_inverse():
    A = CAT.algebra("d77")
    assert change_of_basis(A, ExactMatrix.identity(4)) == A
    g = ExactMatrix([[1, 2, 0, 0], [0, 1, 0, 3], [1, 0, 1, 0], [0, 0, 0, 2]])
    assert change_of_basis(change_of_basis(A, g), g.inverse()) == A
    with pytest.raises(ValueError):
        change_of_basis(A, ExactMatrix.zeros(4))


def test_diagonal_rescaling_keeps_d20_shape():
    # g = diag(a, b, c): e1 e3 = p e2 becomes (a c / b) p e2, e3 e3 = e2 becomes (c^2 / b) e2
    A = parse_structure(CAT["d20"].structure, 3, {"p": 2, "q": 3})
    B = change_of_basis(A, ExactMatrix([[2, 0, 0], [0, 9, 0], [0, 0, 3]]))
    assert B == parse_structure("(4/3)*p(1,3;2) + 2*p(3,1;2) + p(3,3;2)", 3)


def test_power_filtration_examples():
    pc = power_subspace_dims(CAT.algebra("d87"))
    assert pc.dims == (4, 1, 0) and pc.nilpotent and pc.index == 3
    assert power_subspace_dims(zero_algebra(3)).dims == (3, 0)
    assert power_subspace_dims(CAT.algebra("d74")).dims == (4, 3, 2, 1, 0)


def test_kernel_examples():
    K = annihilator_kernel(CAT.algebra("d73"))
    assert K.dim == 1 and K.contains({1: 1})
    K = annihilator_kernel(CAT.algebra("d87"))
    assert K.dim == 2 and K.contains({1: 1}) and K.contains({3: 1})
    assert annihilator_kernel(zero_algebra(4)).dim == 4


def test_core_examples():
    C = core_of(CAT.algebra("d73"))
    assert C.dim == 3 and render(C) == "p(2,2;1)"
    assert core_of(zero_algebra(3)).dim == 0
    assert core_of(CAT.algebra("d86(2:3)")) == zero_algebra(2)
    with pytest.raises(ValueError):
        core_of(parse_structure("p(1,1;1)", 1))


def test_center_examples():
    Z = center(CAT.algebra("d87"))
    assert Z.dim == 2 and Z.contains({1: 1}) and Z.contains({3: 1})
    assert center(CAT.algebra("d74")).dim == 4
    assert center(CAT.algebra("d85")).dim == 4


@pytest.mark.parametrize("ref", FOUR_DIM)
def test_kernel_is_completely_trivial_ideal(ref):
    A = CAT.algebra(ref)
    K = annihilator_kernel(A)
    for v in K.basis:
        for i in range(4):
            e = {i: 1}
            assert not A.mul(v, e) and not A.mul(e, v)
    assert core_of(A).dim == A.dim - K.dim


@given(st.sampled_from(FOUR_DIM), invertible)
def test_structural_invariants_survive_basis_change(ref, g):
    A = CAT.algebra(ref)
    B = change_of_basis(A, g)
    assert is_associative(B)[0]
    assert is_commutative(B) == is_commutative(A)
    assert power_subspace_dims(B).dims == power_subspace_dims(A).dims
    assert annihilator_kernel(B).dim == annihilator_kernel(A).dim
    assert center(B).dim == center(A).dim


@given(upward_terms)
def test_render_round_trip(terms):
    A = upward_algebra(terms)
    assert parse_structure(render(A), 4) == A


def test_render_round_trip_with_cyclotomic_coefficients():
    A = parse_structure("(z^4)*p(1,4;2) + (1 - z^4)*p(4,1;2) - (3/2)*p(4,4;3)", 4)
    assert parse_structure(render(A), 4) == A


def test_direct_sum_blocks():
    S = direct_sum(CAT.algebra("nil2"), zero_algebra(1))
    assert S.dim == 3 and render(S) == "p(1,1;2)"
