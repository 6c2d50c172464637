import itertools
import json
from fractions import Fraction

import pytest

from bellforge import catalog
from bellforge.canon import canonical_key
from bellforge.core import BellInequality, FormatError, GuardError, ShapeError, chsh as make_chsh
from bellforge.extension import (
    ConditionError,
    Pair,
    RawTransform,
    Single,
    UTemplate,
    apply_extension,
    check_condition_a,
    check_condition_b,
    check_condition_b_relaxed,
    diagonal,
    enumerate_templates,
    instantiate,
    load_transform,
    row_options,
    template_at,
    template_count,
    transform_from_json,
)
from bellforge.polytope import check_tightness, check_validity, scan_vertices

EX4 = catalog.template_a2()


def test_instantiate_diag_c0c0():
    assert instantiate(catalog.template_a3(), (-1, 1)) == [[-1, 0], [0, -1]]


@pytest.mark.parametrize("c, expected", [((1, 1), [[0, 1], [-1, 0]]), ((1, -1), [[-1, 0], [-1, 0]])])
def test_instantiate_example4(c, expected):
    # row 0: (-c0 + c1)/2 at col 0 and (c0 + c1)/2 at col 1; row 1: -c0 at col 0
    assert instantiate(EX4, c) == expected


def test_instantiate_rows_have_one_unit_entry():
    for t in enumerate_templates(2, 2):
        for c in itertools.product((1, -1), repeat=2):
            U = instantiate(t, c)
            for row in U:
                assert sorted(abs(x) for x in row) == [0, 1]


def test_single_only_all_ones_is_signed_permutation():
    t = UTemplate(3, 2, (Single(2, 0, -1), Single(0, 1, 1), Single(1, 0, 1)))
    assert instantiate(t, (1, 1)) == [[0, 0, -1], [1, 0, 0], [0, 1, 0]]


def test_instantiate_length_error():
    with pytest.raises(ShapeError):
        instantiate(catalog.template_a3(), (1,))


def test_pair_invariants():
    with pytest.raises(ShapeError):
        Pair(0, 0, 0, 1)
    with pytest.raises(ShapeError):
        Pair(0, 1, 1, 0)
    with pytest.raises(ShapeError):
        UTemplate(2, 2, (Single(2, 0), Single(0, 0)))


def test_condition_a_examples():
    assert check_condition_a(diagonal(4, 4))
    assert check_condition_a(catalog.template_a4())
    raw = RawTransform(2, 2, (((1, 0), (0, 1)), ((1, 0), (0, 0))))
    res = check_condition_a(raw)
    assert not res
    assert res.witness == {"c": [1, 1], "b": [1, 1], "image": ["2", "1"]}


def test_raw_transform_rejected_by_apply(chsh):
    raw = RawTransform(2, 2, (((1, 1), (0, 0)), ((1, 0), (0, 0))))
    with pytest.raises(ConditionError) as err:
        apply_extension(chsh, raw)
    assert err.value.witness["image"][0] == "2"


def test_raw_transform_accepted_when_admissible(chsh):
    raw = RawTransform(2, 2, (((1, 0), (0, 0)), ((0, 0), (0, 1))))
    assert apply_extension(chsh, raw) == apply_extension(chsh, diagonal(2, 2))


def test_condition_b_examples():
    assert check_condition_b(catalog.template_a5())
    assert not check_condition_b(EX4)
    assert not check_condition_b(catalog.template_a1())


def test_condition_b_relaxed_examples():
    res = check_condition_b_relaxed(diagonal(2, 2))
    assert res.holds and set(res.witnesses) == {(1, 1), (1, -1)}
    res = check_condition_b_relaxed(EX4)
    assert not res.holds and len(res.witnesses) == 1
    # the non-singular set of the example-4 template is {(1,1), (-1,-1)}
    nonsing = [c for c in itertools.product((1, -1), repeat=2) if _det(instantiate(EX4, c))]
    assert set(nonsing) == {(1, 1), (-1, -1)}
    res = check_condition_b_relaxed(catalog.template_a3())
    assert res.holds and res.witnesses == ((1, 1), (1, -1))


def _det(U):
    return U[0][0] * U[1][1] - U[0][1] * U[1][0]


def test_extension_a3(chsh):
    ext = apply_extension(chsh, catalog.template_a3())
    half = Fraction(1, 2)
    assert ext.terms() == {
        (0, 0, 0): half,
        (0, 1, 0): half,
        (1, 0, 0): half,
        (1, 1, 0): -half,
    }
    assert ext.bound == 1


def test_extension_a4_and_diag_equivalent(chsh):
    a = apply_extension(chsh, catalog.template_a4())
    b = apply_extension(chsh, diagonal(2, 2))
    assert canonical_key(a) == canonical_key(b) == canonical_key(catalog.get("A4"))


def test_extension_example4_coefficients(chsh):
    ext = apply_extension(chsh, EX4)
    q = Fraction(1, 4)
    assert ext.coeffs == (-3 * q, q, q, q, q, q, q, q)
    assert ext == catalog.get("A2")
    assert canonical_key(ext) == canonical_key(catalog.get("A2"))
    assert check_tightness(ext).tight


def test_chsh_from_trivial():
    trivial = catalog.get("a1")
    assert trivial.coeffs == (1, 0)
    ext = apply_extension(trivial, catalog.template_a4(), target_party=0)
    assert ext.scenario.settings == (2, 2)
    assert canonical_key(ext) == canonical_key(make_chsh())


def test_extension_dimension_mismatch(chsh):
    with pytest.raises(ShapeError):
        apply_extension(chsh, diagonal(3, 2))
    with pytest.raises(ShapeError):
        apply_extension(chsh, diagonal(2, 2), target_party=5)


def test_new_party_appended_last(chsh):
    ext = apply_extension(chsh, catalog.template_a3(), target_party=0)
    assert ext.scenario.settings == (2, 2, 2)


@pytest.mark.parametrize("n, k, count", [(2, 2, 256), (1, 1, 2), (2, 1, 16), (3, 2, 36**3)])
def test_template_counts(n, k, count):
    assert template_count(n, k) == count
    if count <= 1000:
        temps = list(enumerate_templates(n, k))
        assert len(temps) == count
        assert len(set(temps)) == count


def test_template_at_matches_enumeration():
    for i, t in enumerate(enumerate_templates(2, 2)):
        assert template_at(2, 2, i) == t
    with pytest.raises(IndexError):
        template_at(2, 2, 256)


def test_template_guard():
    with pytest.raises(GuardError):
        next(enumerate_templates(5, 2))


@pytest.mark.parametrize("n, k", [(n, k) for n in (1, 2, 3) for k in (1, 2, 3)])
def test_grammar_implies_condition_a_rows(n, k):
    # condition (a) factorises over rows, so checking every row option covers every template
    for row in row_options(n, k):
        others = [Single(0, 0, 1)] * (n - 1)
        t = UTemplate(n, k, (row, *others))
        assert check_condition_a(t)


def test_grammar_implies_condition_a_full_small():
    for n, k in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3)]:
        assert all(check_condition_a(t) for t in enumerate_templates(n, k))


@pytest.fixture(scope="module")
def census():
    base = make_chsh()
    base_max = scan_vertices(base, collect=False).max_value
    rows = []
    for t in enumerate_templates(2, 2):
        ext = apply_extension(base, t)
        some_nonsingular = any(
            _det(instantiate(t, c)) != 0 for c in itertools.product((1, -1), repeat=2)
        )
        rows.append(
            {
                "t": t,
                "ext": ext,
                "max": scan_vertices(ext, collect=False).max_value,
                "b": check_condition_b(t),
                "relaxed": check_condition_b_relaxed(t).holds,
                "tight": check_tightness(ext).tight,
                "nonsingular": some_nonsingular,
            }
        )
    return base_max, rows


def test_validity_transfer(census):
    base_max, rows = census
    assert all(r["max"] <= 1 for r in rows)


def test_bound_preservation(census):
    base_max, rows = census
    for r in rows:
        if r["nonsingular"]:
            assert r["max"] == base_max


def test_tightness_transfer(census):
    _, rows = census
    for r in rows:
        if r["relaxed"]:
            assert r["tight"]


def test_implication_order(census):
    _, rows = census
    for r in rows:
        if r["b"]:
            assert r["relaxed"]
    assert any(r["tight"] and not r["relaxed"] for r in rows)


@pytest.mark.parametrize("name, template", [
    ("4by4", catalog.template_gisin_diagonal),
    ("4by42", catalog.template_gisin_diagonal),
    ("4by4", catalog.template_gisin_block),
    ("4by42", catalog.template_gisin_block),
])
def test_tightness_transfer_gisin(name, template):
    t = template()
    assert check_condition_b_relaxed(t).holds
    ext = apply_extension(catalog.get(name), t)
    assert check_tightness(ext).tight


def test_template_json_round_trip():
    for t in [EX4, catalog.template_gisin_block(), diagonal(3, 3)]:
        again = load_transform(json.dumps(t.to_json()))
        assert again == t
    raw = RawTransform(2, 1, (((Fraction(1, 2),), (0,)), ((0,), (1,))))
    assert transform_from_json(json.loads(json.dumps(raw.to_json()))) == raw


def test_template_json_errors():
    with pytest.raises(FormatError):
        load_transform("{")
    with pytest.raises(FormatError):
        transform_from_json({"n": 2, "k_new": 2})
    with pytest.raises(FormatError):
        transform_from_json({"n": 1, "k_new": 1, "rows": [{"kind": "triple"}]})
    with pytest.raises(FormatError):
        transform_from_json({"n": 1, "k_new": 1, "rows": [{"kind": "single", "col": 0, "cidx": 3}]})


def test_condition_b_invariant_for_bound_preservation_on_singular_template(chsh):
    # A1 generator is singular for every c yet the output stays valid
    t = catalog.template_a1()
    assert not any(_det(instantiate(t, c)) for c in itertools.product((1, -1), repeat=2))
    ext = apply_extension(chsh, t)
    assert check_validity(ext).valid
