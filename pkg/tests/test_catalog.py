import random
from fractions import Fraction

import pytest

from bellforge import catalog
from bellforge.canon import MAX_GROUP_SIZE, apply_symmetry, canonical_key, group_size, random_symmetry
from bellforge.core import BellInequality, algebraic_max, chsh as make_chsh
from bellforge.extension import apply_extension
from bellforge.polytope import check_tightness, scan_vertices

ENTRIES = {e.name: e for e in catalog.load_catalog()}


def test_catalog_contents():
    expected = {
        "CHSH", "a1", "A1", "A2", "A3", "A4", "A5", "MABK4",
        "4by4", "4by42", "4by4by4", "4by4by42", "4by4by43", "4by4by43-printed", "4by4by44",
    }
    assert set(ENTRIES) == expected


@pytest.mark.parametrize("name", sorted(ENTRIES))
def test_expect_tight_flag(name):
    entry = ENTRIES[name]
    assert check_tightness(entry.inequality).tight == entry.expect_tight


def test_printed_4by4by43_is_not_valid():
    ineq = catalog.get("4by4by43-printed")
    assert scan_vertices(ineq, collect=False).max_value == 20
    assert ineq.bound == 12


def test_gisin_pair_is_tight():
    for name, bound in (("4by4", 6), ("4by42", 10)):
        rep = check_tightness(catalog.get(name))
        assert rep.tight and rep.rank == rep.dimension == 16
        assert catalog.get(name).bound == bound


def test_worked_extensions_reproduce_catalog():
    ext = catalog.worked_extensions()
    for name, ineq in ext.items():
        target = catalog.get(name)
        if group_size(ineq.scenario) <= MAX_GROUP_SIZE:
            assert canonical_key(ineq) == canonical_key(target), name
        else:
            # integer display form of the extension is the stored one
            assert ineq.normalized().coeffs == target.normalized().coeffs, name


def test_4by4by43_is_twice_the_extension():
    ext = apply_extension(catalog.get("4by4"), catalog.template_gisin_block())
    stored = catalog.get("4by4by43")
    assert stored.coeffs == tuple(2 * c for c in ext.coeffs)
    assert stored.bound == 2 * ext.bound == 12


def test_4by4by44_integer_display():
    ext = apply_extension(catalog.get("4by42"), catalog.template_gisin_block())
    assert ext.integer_scaled() == catalog.get("4by4by44")


def test_mabk_structure():
    mabk = catalog.get("MABK4")
    assert len(mabk.terms()) == 16
    assert all(abs(c) == 1 for c in mabk.terms().values())
    assert mabk.bound == 4
    # sign depends only on the number of second settings
    for idx, c in mabk.terms().items():
        k = sum(idx)
        assert (c > 0) == (k in (0, 3, 4))


def test_match_examples():
    chsh = make_chsh()
    assert catalog.match_catalog(apply_extension(chsh, catalog.template_a3())) == "A3"
    assert catalog.match_catalog(catalog.worked_extensions()["MABK4"]) == "MABK4"
    rng = random.Random(1)
    g = random_symmetry(chsh.scenario, rng)
    assert catalog.match_catalog(apply_symmetry(chsh, g).scaled(5)) == "CHSH"


def test_match_none_for_perturbed():
    a2 = catalog.get("A2")
    coeffs = list(a2.coeffs)
    coeffs[3] += Fraction(1, 8)
    assert catalog.match_catalog(BellInequality(a2.scenario, tuple(coeffs), 1)) is None


def test_match_beyond_guard_uses_exact_form():
    ineq = catalog.get("4by4by42").scaled(Fraction(1, 2))
    assert catalog.match_catalog(ineq) == "4by4by42"


def test_algebraic_max_above_bound():
    for entry in catalog.load_catalog():
        ineq = entry.inequality
        assert algebraic_max(ineq) >= ineq.bound
