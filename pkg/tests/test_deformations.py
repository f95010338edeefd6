from __future__ import annotations

import pytest
import sympy

from nilstrata.catalog import PASS, load_catalog
from nilstrata.deformations import (BasisError, DegreeError, DeformationFamily, check_entry, family_associative,
                                    h2_data_of, ideals_agree, obstruction_relations, quadratic_span_equal,
                                    verify_h2_data)
from nilstrata.hochschild import Cochain, differential
from nilstrata.isomorphism import fingerprint

CAT = load_catalog()
D73 = CAT["d73"]


@pytest.fixture(scope="module")
def h2():
    return h2_data_of(D73)


def test_recorded_data_checks_pass():
    results = check_entry(D73)
    assert [r.status for r in results] == [PASS] * len(results)
    assert {r.check for r in results} >= {"H2 basis", "family associative", "quadratic relations",
                                          "order 3 relations"}


def test_h2_report(h2):
    A, cocycles = h2
    rep = verify_h2_data(A, cocycles)
    assert rep.ok and rep.h2 == 3
    assert not verify_h2_data(A, cocycles[:2]).ok
    assert not verify_h2_data(A, [cocycles[0], cocycles[0], cocycles[1]]).ok
    exact = differential(A, Cochain(1, 4, {(1, (0,)): 1}))
    rep = verify_h2_data(A, cocycles[:2] + [exact])
    assert not rep.ok and rep.coboundary[2]
    rep = verify_h2_data(A, [Cochain(2, 4, {(0, (0, 0)): 1})] + cocycles[1:])
    assert not rep.ok and not rep.cocycle[0]


def test_constant_family_is_associative():
    A = CAT.algebra("d77")
    F = DeformationFamily.parse(CAT["d77"].structure, A, params=())
    assert family_associative(F)


def test_linear_family_along_a_non_cocycle_is_not_associative(h2):
    A, _ = h2
    F = DeformationFamily.linear(A, [Cochain(2, 4, {(0, (0, 0)): 1})])
    assert not family_associative(F)
    assert not family_associative(F, sampled=True)


def test_recorded_family_is_associative_identically(h2):
    A, _ = h2
    F = DeformationFamily.parse(D73.deform["family"], A)
    assert F.params == ("t2",) and F.degree() == 2
    assert family_associative(F) and family_associative(F, sampled=True)
    assert fingerprint(F.at({"t2": 1})).fields() != fingerprint(A).fields()
    with pytest.raises(DegreeError):
        family_associative(F, degree_bound=1)


def test_family_must_reduce_to_its_base(h2):
    A, _ = h2
    with pytest.raises(ValueError):
        DeformationFamily.parse("p(1,1;2) + t*p(1,1;1)", A)


def test_quadratic_relations(h2):
    A, cocycles = h2
    rels = obstruction_relations(A, cocycles, order=2)
    t1, t2, t3 = rels.symbols
    assert quadratic_span_equal(rels.nonzero(), [t3**2, t2 * t3], rels.symbols)
    assert not quadratic_span_equal(rels.nonzero(), [t3**2], rels.symbols)


def test_cubic_relation_at_ideal_level(h2):
    A, cocycles = h2
    rels = obstruction_relations(A, cocycles, order=3)
    t1, t2, t3 = rels.symbols
    stated = [t3**2, t2 * t3, t2**2 * (t1 + t3)]
    assert ideals_agree(rels.relations, stated, rels.symbols, 3)
    assert not ideals_agree(rels.relations, [t3**2, t2 * t3], rels.symbols, 3)


def test_relations_are_covariant_under_recombination(h2):
    # s1 d1 + s2 (d1 + d2) + s3 d3 = (s1 + s2) d1 + s2 d2 + s3 d3
    A, (d1, d2, d3) = h2
    shifted = d1 + differential(A, Cochain(1, 4, {(0, (2,)): 1}))
    rels = obstruction_relations(A, [shifted, d1 + d2, d3], order=2, params=("s1", "s2", "s3"))
    s1, s2, s3 = rels.symbols
    t1, t2, t3 = sympy.symbols("t1 t2 t3")
    base = obstruction_relations(A, [d1, d2, d3], order=2)
    moved = [sympy.expand(r.subs({t1: s1 + s2, t2: s2, t3: s3}, simultaneous=True)) for r in base.nonzero()]
    assert quadratic_span_equal(rels.nonzero(), moved, rels.symbols)


def test_obstruction_input_errors(h2):
    A, cocycles = h2
    with pytest.raises(BasisError):
        obstruction_relations(A, [])
    with pytest.raises(BasisError):
        obstruction_relations(A, cocycles[:2])
    with pytest.raises(ValueError):
        obstruction_relations(A, cocycles, order=4)


def test_entry_without_data():
    with pytest.raises(ValueError):
        check_entry(CAT["d87"])
