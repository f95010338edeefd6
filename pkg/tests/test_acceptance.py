"""One test per acceptance criterion; each records a PASS/FAIL line for the summary."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product

import pytest

from nilstrata.algebra import change_of_basis, is_commutative, is_nilpotent, opposite, parse_structure
from nilstrata.bilinear import are_cogredient, canon2, congruent, form3, form_B, form_C
from nilstrata.catalog import (PASS, VerifyOptions, generic_formula, instantiate, load_catalog, parameter_cases,
                               parse_pair, verify_catalog)
from nilstrata.deformations import check_entry
from nilstrata.extensions import central_ext_classes, codim1_ext_enumerate, contains_class, dedupe
from nilstrata.hochschild import Cochain, cohomology_dims, differential_matrix, gbracket
from nilstrata.isomorphism import are_isomorphic, fingerprint, verify_iso
from nilstrata.linalg import ExactMatrix

pytestmark = pytest.mark.slow

CAT = load_catalog()
RNG_SEED = 20240601


def instances(dim: int | None = None, samples: int = 5):
    """(label, algebra) for every row, special value and generic sample in the catalog."""
    for e in CAT:
        if dim is not None and e.dim != dim:
            continue
        for k, _ in parameter_cases(e, samples):
            yield e.label(k), instantiate(e, parse_pair(k) if k else None)


def random_invertible(rng: random.Random, n: int = 4, lo: int = -2, hi: int = 2) -> ExactMatrix:
    while True:
        g = ExactMatrix([[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)])
        if g.is_invertible():
            return g


def summarize(parts: dict[str, bool]) -> str:
    bad = [k for k, ok in parts.items() if not ok]
    return f"{len(parts) - len(bad)}/{len(parts)} checks" + (f"; failing: {', '.join(bad)}" if bad else "")


@pytest.fixture(scope="module")
def report():
    return verify_catalog(CAT, opts=VerifyOptions(samples=5))


def test_criterion_1_cohomology_table(report, record_criterion):
    rows = [r for r in report.results if r.check == "cohomology"]
    table_rows = sum(1 if not e.family else len(e.table_rows()) + 1 for e in CAT if e.dim == 4 and e.structure)
    generic = {e.name: sum(1 for k, g in parameter_cases(e, 5) if g) for e in CAT if e.dim == 4 and e.family}
    checked = {r.entry for r in rows}
    ok = (table_rows == 31 and all(r.status == PASS for r in rows) and min(generic.values()) >= 3
          and {"d73", "d75(0:0)", "d83(1:0)", "d86(1:-1)", "d87"} <= checked)
    examples = {r.entry: r.computed for r in rows if r.entry in ("d73", "d75(0:0)", "d83(1:0)", "d86(1:-1)", "d87")}
    assert examples == {"d73": (2, 2, 3, 4), "d75(0:0)": (4, 8, 17, 41), "d83(1:0)": (2, 5, 11, 21),
                        "d86(1:-1)": (2, 6, 15, 38), "d87": (2, 8, 17, 42)}
    record_criterion(1, "cohomology table reproduced", ok,
                     f"{table_rows} rows, {len(rows)} cases incl. {sum(generic.values())} generic samples")
    assert ok


def test_criterion_2_associative_and_nilpotent(record_criterion):
    structures = list(instances())
    for e in CAT:
        for text in e.alts + list(e.values.get("candidate", {}).values()) \
                + list(e.values.get("presentation_structure", {}).values()):
            structures.append((f"{e.name} extra", parse_structure(text, e.dim)))
    bad = [label for label, A in structures
           if not (gbracket(Cochain.from_algebra(A), Cochain.from_algebra(A)).is_zero() and is_nilpotent(A))]
    record_criterion(2, "[d,d] = 0 and nilpotent", not bad, f"{len(structures)} structures")
    assert not bad


def test_criterion_3_kernels_and_cores(report, record_criterion):
    kernels = [r for r in report.results if r.check == "kernel dim"]
    cores = [r for r in report.results if r.check == "core"]
    stated = {r.entry: r.computed for r in kernels}
    ok = (all(r.status == PASS for r in kernels + cores)
          and stated["d73"] == 1 and stated["d75(1:3/2)"] == 2 and stated["d86(1:3/2)"] == 2
          and stated["d86(0:0)"] == 3 and stated["d87"] == 2)
    record_criterion(3, "kernel dimensions and cores", ok,
                     f"{len(kernels)} kernel claims, {len(cores)} core witnesses")
    assert ok


def test_criterion_4_three_dimensional_reconstruction(record_criterion):
    raw = central_ext_classes(CAT.algebra("triv2")) + central_ext_classes(CAT.algebra("nil2"))
    # the split extension of the trivial plane is the trivial algebra, not a new stratum;
    # d20(0:0) arises over both quotients
    algs = dedupe([A for A in raw if A.c])
    grid_d20 = [CAT.algebra(f"d20({pq})") for pq in
                ["0:0", "1:0", "1:1", "1:-1", "1:2", "1:z^4", "2:3", "3:-5", "-4:7"]]
    targets = [CAT.algebra("d19"), CAT.algebra("d21")] + grid_d20

    def matches(A, B):
        return are_isomorphic(A, B, budget=60).is_witness

    every_output_known = all(any(matches(A, T) for T in targets) for A in algs)
    every_target_found = all(any(matches(A, T) for A in algs) for T in targets)
    classes = len(algs) == len(targets)
    ok = every_output_known and every_target_found and classes
    record_criterion(4, "3-dim algebras from central extensions", ok,
                     f"{len(raw)} extensions, {len(algs)} classes: d19, d21 and {len(grid_d20)} members of d20")
    assert ok


@pytest.fixture(scope="module")
def codim1_outputs():
    return {name: codim1_ext_enumerate(CAT.algebra(name)) for name in ("d19", "d21", "triv3")}


def test_criterion_5_extension_provenance(codim1_outputs, record_criterion):
    wanted = {
        "d19": ["d73", "d76", "d77", "d79"],
        "d21": ["d78(1:-1)", "d81", "d84", "d87"],
        "triv3": ["d77", "d80", "d79", "d84", "d87", "d83(2:3)", "d83(3:-5)", "d86(2:3)", "d86(3:-5)"],
    }
    parts = {f"{ideal}->{ref}": contains_class(codim1_outputs[ideal], CAT.algebra(ref)) is not None
             for ideal, refs in wanted.items() for ref in refs}
    ok = all(parts.values())
    sizes = ", ".join(f"{k}: {len(v)}" for k, v in codim1_outputs.items())
    record_criterion(5, "codimension-one extensions contain the strata", ok, f"{summarize(parts)}; outputs {sizes}")
    assert ok


def d_pq(p, q):
    return parse_structure("p(1,3;2) + p(3,3;2) + p*p(4,1;2) + q*p(3,4;2)", 4, {"p": p, "q": q})


LITERAL_PAIRS = [(1, 2), (1, 3), (2, 3)]


def relation_pairs(sign: int):
    for x, y in LITERAL_PAIRS:
        r = sign * Fraction(x * y, x * x + x * y + y * y)
        yield (x, y), (r.denominator, r.numerator)


@pytest.fixture(scope="module")
def identification_parts():
    parts: dict[str, bool] = {}
    for left, right in [("d75(0:0)", "d86(1:1)"), ("d83(0:0)", "d86(0:0)"), ("d78(0:0)", "d86(1:z^4)")]:
        parts[f"{left}~{right}"] = are_isomorphic(CAT.algebra(left), CAT.algebra(right)).is_witness
    d75 = CAT["d75"]
    for pq, target in (("1:-1", "d80"), ("1:1", "d82")):
        parts[f"d75 formula({pq})~{target}"] = are_isomorphic(generic_formula(d75, parse_pair(pq)),
                                                             CAT.algebra(target)).is_witness
    for name in ("d75", "d86"):
        for pq in ("2:3", "3:-5", "-4:7", "5:11", "7:-2"):
            p, q = pq.split(":")
            parts[f"{name}({pq})~{name}({q}:{p})"] = are_isomorphic(
                CAT.algebra(f"{name}({pq})"), CAT.algebra(f"{name}({q}:{p})")).is_witness
    for (x, y), (p, q) in relation_pairs(+1):
        v = are_isomorphic(d_pq(p, q), CAT.algebra(f"d78({x}:{y})"))
        parts[f"d({p}:{q})~d78({x}:{y}) stated relation"] = v.is_witness
    for name in ("d73", "d77", "d81", "d82"):
        A = CAT.algebra(name)
        parts[f"{name} self-opposite"] = are_isomorphic(A, opposite(A)).is_witness
    v = are_isomorphic(CAT.algebra("d84"), CAT.algebra("d85"), thorough=True)
    parts["d84 vs d85 refuted on h1"] = v.is_refuted and v.invariants.get("h1") == (4, 7)
    cross = [("d73", "d74"), ("d73", "d87"), ("d74", "d79"), ("d76", "d85"), ("d77", "d81"), ("d78(2:3)", "d84"),
             ("d79", "d82"), ("d80", "d87"), ("d81", "d84"), ("d83(2:3)", "d86(2:3)"), ("d75(2:3)", "d80"),
             ("d76", "d77")]
    for left, right in cross:
        A, B = CAT.algebra(left), CAT.algebra(right)
        assert fingerprint(A).fields() != fingerprint(B).fields()
        parts[f"{left} vs {right} refuted"] = are_isomorphic(A, B).is_refuted
    return parts


LITERAL_KEYS = [f"d({q[0]}:{q[1]})~d78({x}:{y}) stated relation" for (x, y), q in relation_pairs(+1)]


@pytest.mark.xfail(strict=True, reason="the stated reparametrization relation does not hold; "
                                       "its sign-corrected form does (see the corrected-relation test)")
def test_criterion_6_isomorphism_identifications(identification_parts, record_criterion):
    ok = all(identification_parts.values())
    record_criterion(6, "isomorphism identifications", ok, summarize(identification_parts))
    assert ok


def test_criterion_6_parts_other_than_the_relation(identification_parts):
    assert all(v for k, v in identification_parts.items() if k not in LITERAL_KEYS)
    assert not any(identification_parts[k] for k in LITERAL_KEYS)


def test_stated_relation_is_refuted_and_corrected_relation_holds():
    for (x, y), (p, q) in relation_pairs(+1):
        v = are_isomorphic(d_pq(p, q), CAT.algebra(f"d78({x}:{y})"))
        assert v.is_refuted, (x, y)
    for (x, y), (p, q) in relation_pairs(-1):
        v = are_isomorphic(d_pq(p, q), CAT.algebra(f"d78({x}:{y})"))
        assert v.is_witness and verify_iso(d_pq(p, q), CAT.algebra(f"d78({x}:{y})"), v.witness), (x, y)


COMMUTATIVE_PRESENTATIONS = {"d0", "d74", "d75(1:1)", "d75(0:0)", "d76", "d79", "d83(1:1)", "d83(0:0)", "d85"}
# stated equalities with members of that list: d86(1:1) = d75(0:0), d86(0:0) = d83(0:0)
ALIASES = {"d86(1:1)", "d86(0:0)"}


@pytest.fixture(scope="module")
def commutative_instances():
    return {label for label, A in instances(dim=4) if is_commutative(A)}


@pytest.mark.xfail(strict=True, reason="the listed d75(1:1) structure is not commutative, while d82 is")
def test_criterion_7_commutativity_flags(commutative_instances, record_criterion):
    d78 = [label for label, _ in instances(dim=4) if label.startswith("d78")]
    extra = sorted(commutative_instances - COMMUTATIVE_PRESENTATIONS - ALIASES)
    missing = sorted(COMMUTATIVE_PRESENTATIONS - commutative_instances)
    ok = not extra and not missing and not any(label in commutative_instances for label in d78)
    record_criterion(7, "commutative exactly on the commutative presentations", ok,
                     f"missing {missing}, unexpected {extra}, {len(d78)} d78 members non-commutative")
    assert ok


def test_criterion_7_observed_commutative_set(commutative_instances):
    assert commutative_instances == (COMMUTATIVE_PRESENTATIONS | ALIASES | {"d82"}) - {"d75(1:1)"}
    d75_11 = CAT.algebra("d75(1:1)")
    presentation = parse_structure(CAT["d75"].values["presentation_structure"]["1:1"], 4)
    assert are_isomorphic(presentation, CAT.algebra("d82")).is_witness
    assert are_isomorphic(presentation, d75_11).is_refuted


def test_criterion_8_bilinear_forms(record_criterion):
    rng = random.Random(RNG_SEED)
    bases = [form_B(1, 2), form_B(1, 3), form_B(0, 0), form_B(1, 0), form_B(1, 1), form_B(1, -1),
             form_C(), ExactMatrix([[1, 2], [0, 5]]), ExactMatrix.zeros(2)]
    class_function = all(canon2(congruent(bases[k % len(bases)], random_invertible(rng, 2, -4, 4))).key
                         == canon2(bases[k % len(bases)]).key for k in range(1000))
    parts = {"canon2 class function (1000 congruences)": class_function,
             "B(1:2)~B(2:1)": are_cogredient(form_B(1, 2), form_B(2, 1)).is_witness,
             "B(1:2) vs B(1:3) refuted": are_cogredient(form_B(1, 2), form_B(1, 3)).is_refuted}
    pairs = [(("B2", 2, 3), ("C2", 2, 3)), (("B3",), ("C3",)), (("B4",), ("C6",)), (("B6",), ("C1", 1, 1)),
             (("B1", 2, 3), ("C1", 2, 3)), (("B1", 1, 2), ("C1", 1, 2))]
    for left, right in pairs:
        B, C = form3(*left), form3(*right)
        v = are_cogredient(B, C)
        parts[f"{left[0]}~{right[0]}"] = v.is_witness and congruent(B, v.witness) == C
    # the two textual anomalies, settled by the oracle
    parts["B1(0:0)~B2(1:1)"] = are_cogredient(form3("B1", 0, 0), form3("B2", 1, 1)).is_witness
    parts["B1(1:1)~C5"] = are_cogredient(form3("B1", 1, 1), form3("C5")).is_witness
    parts["B5 vs C5 refuted"] = are_cogredient(form3("B5"), form3("C5")).is_refuted
    parts["B5~C4"] = are_cogredient(form3("B5"), form3("C4")).is_witness
    ok = all(parts.values())
    record_criterion(8, "bilinear form classes", ok,
                     summarize(parts) + "; findings: B1(0:0)~B2(1:1), C5 matches B1(1:1) only, B5~C4")
    assert ok


def test_criterion_9_deformation_data(record_criterion):
    results = check_entry(CAT["d73"])
    ok = all(r.status == PASS for r in results)
    cubic = next(r for r in results if r.check == "order 3 relations")
    record_criterion(9, "deformation data of d73", ok, f"{len(results)} checks; cubic relation: {cubic.note}")
    assert ok


def random_cochain(rng: random.Random, arity: int, dim: int = 2) -> Cochain:
    keys = list(product(range(dim), product(range(dim), repeat=arity)))
    return Cochain(arity, dim, {k: rng.randint(-3, 3) for k in rng.sample(keys, min(4, len(keys)))})


ADVERSARIAL = [("d83(1:2)", "d83(2:1)"), ("d83(1:0)", "d83(0:1)"), ("d80", "d75(1:-1)"), ("d78(1:2)", "d78(1:3)"),
               ("d75(1:1)", "d82"), ("d86(2:3)", "d86(2:5)"), ("d84", "d81"), ("d75(2:3)", "d75(3:5)"),
               ("d20(1:2)", "d20(1:3)"), ("d77", "d73")]


def test_criterion_10_property_suites(record_criterion):
    rng = random.Random(RNG_SEED)
    refs = ["d73", "d74", "d75(2:3)", "d76", "d77", "d78(2:3)", "d79", "d80", "d81", "d82",
            "d83(2:3)", "d84", "d85", "d86(2:3)", "d87"]
    fp_ok = h_ok = True
    for k in range(100):
        A = CAT.algebra(refs[k % len(refs)])
        B = change_of_basis(A, random_invertible(rng))
        fp_ok &= fingerprint(B).fields() == fingerprint(A).fields()
        h_ok &= cohomology_dims(B, 3).dims == cohomology_dims(A, 3).dims
    dd_ok = all((differential_matrix(A, n + 1) @ differential_matrix(A, n)).rank() == 0
                for _, A in instances() for n in range(3))
    anti_ok = jacobi_ok = True
    for _ in range(200):
        m, n = rng.randint(0, 3), rng.randint(0, 3)
        if m + n == 0 or m + n - 1 > 4:
            continue
        x, y = random_cochain(rng, m), random_cochain(rng, n)
        sign = -1 if ((m - 1) * (n - 1)) % 2 == 0 else 1
        anti_ok &= gbracket(x, y) == gbracket(y, x).scale(sign)
    for _ in range(100):
        a, b, c = (rng.randint(0, 2) for _ in range(3))
        if a + b + c - 2 not in range(0, 5) or min(a + b, b + c, a + c) < 1:
            continue
        x, y, z = random_cochain(rng, a), random_cochain(rng, b), random_cochain(rng, c)
        rhs = gbracket(gbracket(x, y), z) + gbracket(y, gbracket(x, z)).scale(-1 if ((a - 1) * (b - 1)) % 2 else 1)
        jacobi_ok &= gbracket(x, gbracket(y, z)) == rhs
    false_witnesses = [(l, r) for l, r in ADVERSARIAL for a, b in ((l, r), (r, l))
                       if are_isomorphic(CAT.algebra(a), CAT.algebra(b), budget=60).is_witness]
    A = CAT.algebra("d77")
    g = random_invertible(rng)
    near = ExactMatrix([[g[i, j] + (Fraction(1, 1000) if (i, j) == (3, 3) else 0) for j in range(4)]
                        for i in range(4)])
    gate_ok = verify_iso(A, change_of_basis(A, g), g) and not verify_iso(A, change_of_basis(A, g), near)
    parts = {"fingerprint invariance (100 g)": fp_ok, "cohomology invariance (100 g)": h_ok,
             "D o D = 0 on the catalog": dd_ok, "graded antisymmetry": anti_ok, "graded Jacobi": jacobi_ok,
             "no false witness on near pairs": not false_witnesses, "verification gate": gate_ok}
    ok = all(parts.values())
    record_criterion(10, "property suites", ok, summarize(parts))
    assert ok
