"""Local relabelling symmetries and canonical forms of Bell inequalities.

The equivalence group acts by permuting each party's settings, flipping the
outcome sign of individual settings, and permuting parties that have the
same number of settings.  Flipping every setting of one party negates the
whole expression, so ``I`` and ``-I`` fall in the same class.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ._accel import get_kernels
from .core import BellInequality, GuardError, Scenario, ShapeError

MAX_GROUP_SIZE = 10**7


@dataclass(frozen=True)
class SymmetryElement:
    """New party q is old party ``party_perm[q]``; its new setting s is old
    setting ``setting_perms[q][s]`` with outcomes multiplied by
    ``sign_flips[q][s]``."""

    setting_perms: tuple[tuple[int, ...], ...]
    sign_flips: tuple[tuple[int, ...], ...]
    party_perm: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "setting_perms", tuple(tuple(p) for p in self.setting_perms))
        object.__setattr__(self, "sign_flips", tuple(tuple(s) for s in self.sign_flips))
        object.__setattr__(self, "party_perm", tuple(self.party_perm))

    def validate(self, scenario: Scenario):
        n = scenario.n_parties
        if sorted(self.party_perm) != list(range(n)):
            raise ShapeError(f"party_perm {self.party_perm} is not a permutation of {n} parties")
        if len(self.setting_perms) != n or len(self.sign_flips) != n:
            raise ShapeError("one setting permutation and sign vector per party required")
        for q, old in enumerate(self.party_perm):
            m = scenario.settings[q]
            if scenario.settings[old] != m:
                raise ShapeError("party permutation must preserve setting counts")
            if sorted(self.setting_perms[q]) != list(range(m)):
                raise ShapeError(f"bad setting permutation for party {q}")
            if len(self.sign_flips[q]) != m or any(s not in (1, -1) for s in self.sign_flips[q]):
                raise ShapeError(f"bad sign flips for party {q}")

    @classmethod
    def identity(cls, scenario: Scenario) -> "SymmetryElement":
        return cls(
            tuple(tuple(range(m)) for m in scenario.settings),
            tuple((1,) * m for m in scenario.settings),
            tuple(range(scenario.n_parties)),
        )


def apply_symmetry(ineq: BellInequality, g: SymmetryElement) -> BellInequality:
    scenario = ineq.scenario
    g.validate(scenario)
    terms = {}
    for new_idx in scenario.multi_indices():
        old_idx = [0] * scenario.n_parties
        sign = 1
        for q, s in enumerate(new_idx):
            old_idx[g.party_perm[q]] = g.setting_perms[q][s]
            sign *= g.sign_flips[q][s]
        c = ineq.coefficient(old_idx)
        if c:
            terms[new_idx] = sign * c
    return BellInequality.from_terms(scenario.settings, terms, ineq.bound, ineq.name)


def party_permutations(scenario: Scenario) -> list[tuple[int, ...]]:
    s = scenario.settings
    return [
        p
        for p in itertools.permutations(range(len(s)))
        if all(s[p[q]] == s[q] for q in range(len(s)))
    ]


def group_size(scenario: Scenario) -> int:
    local = math.prod(math.factorial(m) * 2**m for m in scenario.settings)
    return local * len(party_permutations(scenario))


@lru_cache(maxsize=None)
def _local_tables(m: int):
    perms, signs = [], []
    for p in itertools.permutations(range(m)):
        for s in itertools.product((1, -1), repeat=m):
            perms.append(p)
            signs.append(s)
    return np.asarray(perms, dtype=np.int64), np.asarray(signs, dtype=np.int64)


def random_symmetry(scenario: Scenario, rng: random.Random) -> SymmetryElement:
    perms = []
    for m in scenario.settings:
        p = list(range(m))
        rng.shuffle(p)
        perms.append(tuple(p))
    signs = [tuple(rng.choice((1, -1)) for _ in range(m)) for m in scenario.settings]
    return SymmetryElement(perms, signs, rng.choice(party_permutations(scenario)))


def canonical_form(ineq: BellInequality, backend: str | None = None) -> BellInequality:
    """Least coefficient array (rational order) over the orbit, bound scaled to 1."""
    scenario = ineq.scenario
    size = group_size(scenario)
    if size > MAX_GROUP_SIZE:
        raise GuardError(
            f"symmetry group of scenario {list(scenario.settings)} has {size} elements; "
            f"canonical forms are limited to {MAX_GROUP_SIZE}"
        )
    ints, _, scale = ineq.normalized().integer_form()
    tables = [_local_tables(m) for m in scenario.settings]
    best = get_kernels(backend).orbit_min(
        np.asarray(ints, dtype=np.int64),
        scenario.settings,
        np.asarray(party_permutations(scenario), dtype=np.int64),
        [t[0] for t in tables],
        [t[1] for t in tables],
    )
    return BellInequality(
        scenario, tuple(Fraction(int(x), scale) for x in best), Fraction(1), None
    )


def canonical_key(ineq: BellInequality, backend: str | None = None):
    form = canonical_form(ineq, backend)
    return form.scenario.settings, form.coeffs


def orbit_min_bruteforce(ineq: BellInequality) -> BellInequality:
    """Reference canonical form by applying every group element explicitly."""
    scenario = ineq.scenario
    norm = ineq.normalized()
    best = None
    for P in party_permutations(scenario):
        for perms in itertools.product(*(itertools.permutations(range(m)) for m in scenario.settings)):
            for signs in itertools.product(
                *(itertools.product((1, -1), repeat=m) for m in scenario.settings)
            ):
                image = apply_symmetry(norm, SymmetryElement(perms, signs, P)).coeffs
                if best is None or image < best:
                    best = image
    return BellInequality(scenario, best, Fraction(1), None)
