"""Built-in inequalities and the transformations that generate them.

Entries live in ``data/catalog/*.json`` in the ordinary inequality format
(plus a ``note`` and an ``expect_tight`` flag) so they can be inspected and
diffed by hand.  Setting indices are 0-based: the textbook ``a_1`` is
setting 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .canon import MAX_GROUP_SIZE, canonical_form, group_size
from .core import BellInequality, chsh
from .extension import Pair, Single, UTemplate, apply_extension, diagonal


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    inequality: BellInequality
    note: str
    expect_tight: bool


@lru_cache(maxsize=None)
def load_catalog() -> tuple[CatalogEntry, ...]:
    entries = []
    for path in resources.files("bellforge").joinpath("data/catalog").iterdir():
        if not path.name.endswith(".json"):
            continue
        doc = json.loads(path.read_text(encoding="utf-8"))
        entries.append(
            (
                doc.get("order", 0),
                CatalogEntry(
                    doc["name"],
                    BellInequality.from_json(doc),
                    doc.get("note", ""),
                    bool(doc.get("expect_tight", True)),
                ),
            )
        )
    return tuple(e for _, e in sorted(entries, key=lambda t: (t[0], t[1].name)))


def get(name: str) -> BellInequality:
    for entry in load_catalog():
        if entry.name == name:
            return entry.inequality
    raise KeyError(name)


@lru_cache(maxsize=None)
def _canonical_forms():
    forms = {}
    for entry in load_catalog():
        if group_size(entry.inequality.scenario) <= MAX_GROUP_SIZE:
            forms[entry.name] = canonical_form(entry.inequality)
    return forms


def match_catalog(ineq: BellInequality) -> str | None:
    """Name of the catalog entry equivalent to ``ineq``, if any.

    A normalised exact match is tried first and works at any size; the
    symmetry-orbit comparison is only attempted within the group-size limit.
    """
    norm = ineq.normalized()
    for entry in load_catalog():
        other = entry.inequality
        if other.scenario == ineq.scenario and other.normalized().coeffs == norm.coeffs:
            return entry.name
    if group_size(ineq.scenario) > MAX_GROUP_SIZE:
        return None
    form = canonical_form(ineq)
    for name, other in _canonical_forms().items():
        if other.scenario == form.scenario and other.coeffs == form.coeffs:
            return name
    return None


# Transformations used in the worked examples, with 0-based indices.

def template_a3() -> UTemplate:
    """``diag(c_0, c_0)`` acting on a two-setting party, new party with 2 settings."""
    return UTemplate(2, 2, (Single(0, 0, 1), Single(1, 0, 1)))


def template_a4() -> UTemplate:
    """``[[(c0+c1)/2, (c0-c1)/2], [(c0-c1)/2, (c0+c1)/2]]``."""
    return UTemplate(2, 2, (Pair(0, 1, 0, 1, 1, 1), Pair(1, 0, 0, 1, 1, 1)))


def template_a4_diagonal() -> UTemplate:
    return diagonal(2, 2)


def template_a5() -> UTemplate:
    """As ``template_a4`` with the sign of entry (1, 0) flipped."""
    return UTemplate(2, 2, (Pair(0, 1, 0, 1, 1, 1), Pair(1, 0, 0, 1, 1, -1)))


def template_a2() -> UTemplate:
    """``[[(-c0+c1)/2, (c0+c1)/2], [-c0, 0]]``; singular at ``c = (1, -1)``."""
    return UTemplate(2, 2, (Pair(1, 0, 0, 1, 1, -1), Single(0, 0, -1)))


def template_a1() -> UTemplate:
    """``[[c0, 0], [c0, 0]]``; singular for every ``c``."""
    return UTemplate(2, 2, (Single(0, 0, 1), Single(0, 0, 1)))


def templates_mabk() -> tuple[UTemplate, UTemplate]:
    """The two transformations (on party B, then on party A) giving MABK from CHSH."""
    on_b = UTemplate(2, 2, (Pair(0, 1, 0, 1, -1, -1), Pair(1, 0, 0, 1, -1, 1)))
    on_a = UTemplate(2, 2, (Pair(0, 1, 0, 1, 1, 1), Pair(1, 0, 0, 1, 1, -1)))
    return on_b, on_a


def template_gisin_diagonal() -> UTemplate:
    return diagonal(4, 4)


def template_gisin_block() -> UTemplate:
    """Two 2x2 blocks ``[[(c0+c1)/2, (c0-c1)/2], [(c0-c1)/2, -(c0+c1)/2]]``."""
    return UTemplate(
        4,
        4,
        (
            Pair(0, 1, 0, 1, 1, 1),
            Pair(1, 0, 0, 1, -1, 1),
            Pair(2, 3, 2, 3, 1, 1),
            Pair(3, 2, 2, 3, -1, 1),
        ),
    )


def worked_extensions() -> dict[str, BellInequality]:
    """Each worked example rebuilt from its base inequality and template."""
    base = chsh()
    on_b, on_a = templates_mabk()
    g1, g2 = get("4by4"), get("4by42")
    return {
        "A3": apply_extension(base, template_a3(), name="A3"),
        "A4": apply_extension(base, template_a4(), name="A4"),
        "A5": apply_extension(base, template_a5(), name="A5"),
        "A2": apply_extension(base, template_a2(), name="A2"),
        "A1": apply_extension(base, template_a1(), name="A1"),
        "MABK4": apply_extension(
            apply_extension(base, on_b, target_party=1), on_a, target_party=0, name="MABK4"
        ),
        "4by4by4": apply_extension(g1, template_gisin_diagonal(), name="4by4by4"),
        "4by4by42": apply_extension(g2, template_gisin_diagonal(), name="4by4by42"),
        "4by4by43": apply_extension(g1, template_gisin_block(), name="4by4by43"),
        "4by4by44": apply_extension(g2, template_gisin_block(), name="4by4by44"),
        "CHSH": apply_extension(get("a1"), template_a4(), target_party=0, name="CHSH"),
    }
