import random
from fractions import Fraction

import pytest

from bellforge import catalog
from bellforge.canon import (
    MAX_GROUP_SIZE,
    SymmetryElement,
    apply_symmetry,
    canonical_form,
    canonical_key,
    group_size,
    orbit_min_bruteforce,
    random_symmetry,
)
from bellforge.core import BellInequality, GuardError, ShapeError, chsh as make_chsh
from bellforge.polytope import check_tightness, scan_vertices

from conftest import random_inequality


def test_identity(chsh):
    g = SymmetryElement.identity(chsh.scenario)
    assert apply_symmetry(chsh, g) == chsh


def test_party_swap(chsh):
    g = SymmetryElement(((0, 1), (0, 1)), ((1, 1), (1, 1)), (1, 0))
    swapped = apply_symmetry(chsh, g)
    for (i, j), c in chsh.terms().items():
        assert swapped.coefficient((j, i)) == c
    assert scan_vertices(swapped, collect=False).max_value == 1


def test_sign_flip_on_new_party_setting():
    a4 = catalog.get("A4")
    g = SymmetryElement(((0, 1),) * 3, ((1, 1), (1, 1), (1, -1)), (0, 1, 2))
    flipped = apply_symmetry(a4, g)
    for idx, c in a4.terms().items():
        assert flipped.coefficient(idx) == (-c if idx[2] == 1 else c)
    assert check_tightness(a4).tight and check_tightness(flipped).tight


def test_invalid_elements(chsh):
    with pytest.raises(ShapeError):
        apply_symmetry(chsh, SymmetryElement(((0, 0), (0, 1)), ((1, 1), (1, 1)), (0, 1)))
    ineq = BellInequality.from_terms([2, 3], {(0, 0): 1}, 1)
    with pytest.raises(ShapeError):
        apply_symmetry(ineq, SymmetryElement(((0, 1), (0, 1, 2)), ((1, 1), (1, 1, 1)), (1, 0)))


def test_group_sizes():
    assert group_size(make_chsh().scenario) == 8 * 8 * 2
    assert group_size(catalog.get("A2").scenario) == 8**3 * 6
    assert group_size(catalog.get("4by4by4").scenario) > MAX_GROUP_SIZE


def test_guard():
    with pytest.raises(GuardError):
        canonical_form(catalog.get("4by4by4"))


def test_canonical_bound_is_one(chsh):
    form = canonical_form(chsh.scaled(3))
    assert form.bound == 1
    assert form == canonical_form(chsh)


@pytest.mark.parametrize("settings_", [(2, 2), (1, 3), (2, 2, 2), (3, 2), (1, 2, 2)])
def test_kernels_match_bruteforce(settings_, backend):
    rng = random.Random(hash(settings_) & 0xFFFF)
    for _ in range(3):
        ineq = random_inequality(rng, settings_, lo=-2, hi=2)
        assert canonical_form(ineq, backend=backend) == orbit_min_bruteforce(ineq)


@pytest.mark.parametrize("name", ["A1", "A2", "A3", "A4", "A5", "CHSH"])
def test_catalog_forms_match_bruteforce(name):
    ineq = catalog.get(name)
    assert canonical_form(ineq) == orbit_min_bruteforce(ineq)


def test_idempotent():
    for name in ("A2", "A5", "MABK4", "4by4"):
        form = canonical_form(catalog.get(name))
        assert canonical_form(form) == form


def test_orbit_soundness_exhaustive_2x2(chsh):
    from bellforge.canon import party_permutations
    import itertools

    ref = canonical_form(chsh)
    count = 0
    for P in party_permutations(chsh.scenario):
        for perms in itertools.product(itertools.permutations(range(2)), repeat=2):
            for signs in itertools.product(itertools.product((1, -1), repeat=2), repeat=2):
                g = SymmetryElement(perms, signs, P)
                assert canonical_form(apply_symmetry(chsh, g)) == ref
                count += 1
    assert count == group_size(chsh.scenario)


def test_orbit_soundness_random_chsh(chsh):
    rng = random.Random(11)
    ref = canonical_key(chsh)
    for _ in range(100):
        assert canonical_key(apply_symmetry(chsh, random_symmetry(chsh.scenario, rng))) == ref


def test_orbit_soundness_random_scenarios():
    rng = random.Random(5)
    for settings_ in [(2, 2, 2), (3, 3), (2, 3, 2)]:
        ineq = random_inequality(rng, settings_)
        ref = canonical_form(ineq)
        for _ in range(10):
            assert canonical_form(apply_symmetry(ineq, random_symmetry(ineq.scenario, rng))) == ref


def test_negation_in_same_class(chsh):
    g = SymmetryElement(((0, 1), (0, 1)), ((-1, -1), (1, 1)), (0, 1))
    neg = apply_symmetry(chsh, g)
    assert neg.coeffs == tuple(-c for c in chsh.coeffs)
    assert canonical_key(neg) == canonical_key(chsh)


def test_tightness_invariant_under_symmetry():
    rng = random.Random(2)
    for entry in catalog.load_catalog():
        ineq = entry.inequality
        if ineq.scenario.dimension() > 16:
            continue
        ref = check_tightness(ineq).tight
        for _ in range(20):
            g = random_symmetry(ineq.scenario, rng)
            assert check_tightness(apply_symmetry(ineq, g)).tight == ref


@pytest.mark.slow
def test_tightness_invariant_under_symmetry_large():
    rng = random.Random(3)
    for name in ("4by4by4", "4by4by43"):
        ineq = catalog.get(name)
        for _ in range(3):
            assert check_tightness(apply_symmetry(ineq, random_symmetry(ineq.scenario, rng))).tight


def test_a4_forms_equal_and_a5_distinct(chsh):
    ext = catalog.worked_extensions()
    from bellforge.extension import apply_extension

    assert canonical_key(ext["A4"]) == canonical_key(apply_extension(chsh, catalog.template_a4_diagonal()))
    assert canonical_key(ext["A4"]) != canonical_key(ext["A5"])


def test_lexicographic_order_is_by_value():
    ineq = BellInequality.from_terms([1, 1], {(0, 0): Fraction(1, 3)}, 1)
    form = canonical_form(ineq)
    assert form.coeffs == (Fraction(-1, 3),)
