"""Scenarios, full-correlation Bell inequalities and their exact evaluation.

Coefficients are stored densely in row-major order with party 0 varying
slowest, so the coefficient of ``a_i b_j c_k`` in a ``[M, N, K]`` scenario
sits at flat index ``(i * N + j) * K + k``.  Setting indices are 0-based.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

MAX_TOTAL_SETTINGS = 24

_RATIONAL_RE = re.compile(r"^-?\d+(/\d+)?$")


class BellForgeError(Exception):
    """Base class for errors raised by this package."""


class ShapeError(BellForgeError, ValueError):
    """Objects whose dimensions do not fit together."""


class GuardError(BellForgeError):
    """An exhaustive computation would exceed the configured size ceiling."""


class FormatError(BellForgeError, ValueError):
    """A file or document does not follow the expected JSON layout."""


def parse_rational(text) -> Fraction:
    if isinstance(text, bool):
        raise FormatError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str) or not _RATIONAL_RE.match(text.strip()):
        raise FormatError(f"not a rational string: {text!r}")
    num, _, den = text.strip().partition("/")
    if den and int(den) == 0:
        raise FormatError(f"zero denominator: {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


@dataclass(frozen=True)
class Scenario:
    """Number of measurement settings of each party (party 0 is Alice)."""

    settings: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(int(m) for m in self.settings))
        if not self.settings:
            raise ShapeError("a scenario needs at least one party")
        if any(m < 1 for m in self.settings):
            raise ShapeError(f"setting counts must be positive: {self.settings}")

    @property
    def n_parties(self) -> int:
        return len(self.settings)

    @property
    def total_settings(self) -> int:
        return sum(self.settings)

    def dimension(self) -> int:
        return math.prod(self.settings)

    def multi_indices(self):
        """All setting multi-indices in storage order."""
        return itertools.product(*(range(m) for m in self.settings))

    def flat_index(self, idx: Sequence[int]) -> int:
        flat = 0
        for i, m in zip(idx, self.settings):
            flat = flat * m + i
        return flat

    def guard(self, limit: int = MAX_TOTAL_SETTINGS):
        if self.total_settings > limit:
            raise GuardError(
                f"scenario {list(self.settings)} has {self.total_settings} settings "
                f"in total; exhaustive enumeration is limited to {limit}"
            )


def _check_assignment(vec) -> tuple[int, ...]:
    vec = tuple(int(x) for x in vec)
    if any(x not in (-1, 1) for x in vec):
        raise ShapeError(f"assignment entries must be +1 or -1: {vec}")
    return vec


@dataclass(frozen=True)
class Vertex:
    """One local deterministic assignment: a +-1 vector per party."""

    per_party: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "per_party", tuple(_check_assignment(v) for v in self.per_party)
        )

    def conforms(self, scenario: Scenario) -> bool:
        return tuple(len(v) for v in self.per_party) == scenario.settings

    def features(self) -> tuple[int, ...]:
        feats = [1]
        for vec in self.per_party:
            feats = [f * x for f in feats for x in vec]
        return tuple(feats)

    def negate_party(self, party: int) -> "Vertex":
        parts = list(self.per_party)
        parts[party] = tuple(-x for x in parts[party])
        return Vertex(tuple(parts))

    def to_json(self):
        return [list(v) for v in self.per_party]


@dataclass(frozen=True)
class BellInequality:
    """``sum_idx coeffs[idx] * prod_p v_p[idx_p] <= bound`` over +-1 assignments."""

    scenario: Scenario
    coeffs: tuple[Fraction, ...]
    bound: Fraction
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.scenario, Scenario):
            object.__setattr__(self, "scenario", Scenario(tuple(self.scenario)))
        coeffs = tuple(Fraction(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "bound", Fraction(self.bound))
        if len(coeffs) != self.scenario.dimension():
            raise ShapeError(
                f"{len(coeffs)} coefficients given for scenario "
                f"{list(self.scenario.settings)} of dimension {self.scenario.dimension()}"
            )
        if self.bound <= 0:
            raise ShapeError(f"bound must be positive, got {self.bound}")
        if not any(coeffs):
            raise ShapeError("all coefficients are zero")

    @classmethod
    def from_terms(cls, settings, terms, bound, name=None) -> "BellInequality":
        """Build from a mapping ``{(i, j, ...): coefficient}``; unspecified terms are 0."""
        scenario = Scenario(tuple(settings))
        coeffs = [Fraction(0)] * scenario.dimension()
        for idx, value in terms.items():
            if len(idx) != scenario.n_parties or any(
                not 0 <= i < m for i, m in zip(idx, scenario.settings)
            ):
                raise ShapeError(f"term index {idx} out of range for {list(settings)}")
            coeffs[scenario.flat_index(idx)] += Fraction(value)
        return cls(scenario, tuple(coeffs), Fraction(bound), name)

    def coefficient(self, idx: Sequence[int]) -> Fraction:
        return self.coeffs[self.scenario.flat_index(idx)]

    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return {
            idx: c
            for idx, c in zip(self.scenario.multi_indices(), self.coeffs)
            if c != 0
        }

    def integer_form(self) -> tuple[list[int], int, int]:
        """Return ``(int_coeffs, int_bound, scale)`` with everything multiplied by
        the LCM of all denominators."""
        scale = 1
        for c in (*self.coeffs, self.bound):
            scale = math.lcm(scale, c.denominator)
        ints = [int(c * scale) for c in self.coeffs]
        return ints, int(self.bound * scale), scale

    def scaled(self, factor) -> "BellInequality":
        factor = Fraction(factor)
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return BellInequality(
            self.scenario,
            tuple(c * factor for c in self.coeffs),
            self.bound * factor,
            self.name,
        )

    def integer_scaled(self) -> "BellInequality":
        """Same inequality multiplied through so all numbers are integers."""
        _, _, scale = self.integer_form()
        return self.scaled(scale)

    def normalized(self) -> "BellInequality":
        """Divide coefficients and bound by the bound."""
        return self.scaled(1 / self.bound)

    def renamed(self, name) -> "BellInequality":
        return BellInequality(self.scenario, self.coeffs, self.bound, name)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "scenario": list(self.scenario.settings),
            "coeffs": [format_rational(c) for c in self.coeffs],
            "bound": format_rational(self.bound),
        }

    @classmethod
    def from_json(cls, doc) -> "BellInequality":
        if not isinstance(doc, dict):
            raise FormatError("an inequality document must be a JSON object")
        for key in ("scenario", "coeffs", "bound"):
            if key not in doc:
                raise FormatError(f"missing key {key!r}")
        settings = doc["scenario"]
        if not isinstance(settings, list) or not all(
            isinstance(m, int) and not isinstance(m, bool) for m in settings
        ):
            raise FormatError("'scenario' must be a list of integers")
        if not isinstance(doc["coeffs"], list):
            raise FormatError("'coeffs' must be a list")
        try:
            return cls(
                Scenario(tuple(settings)),
                tuple(parse_rational(c) for c in doc["coeffs"]),
                parse_rational(doc["bound"]),
                doc.get("name"),
            )
        except ShapeError as exc:
            raise FormatError(str(exc)) from exc

    def dumps(self, pretty: bool = False) -> str:
        return json.dumps(self.to_json(), indent=2 if pretty else None)

    @classmethod
    def loads(cls, text: str) -> "BellInequality":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(
                f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
            ) from exc
        # accept a CLI run report wrapping an inequality
        if isinstance(doc, dict) and "coeffs" not in doc and isinstance(
            doc.get("result"), dict
        ):
            doc = doc["result"].get("inequality", doc["result"])
        return cls.from_json(doc)


def evaluate(ineq: BellInequality, v: Vertex) -> Fraction:
    """Exact value of the Bell expression at a deterministic assignment."""
    if not v.conforms(ineq.scenario):
        raise ShapeError(
            f"vertex shape {[len(x) for x in v.per_party]} does not match "
            f"scenario {list(ineq.scenario.settings)}"
        )
    total = Fraction(0)
    for c, f in zip(ineq.coeffs, v.features()):
        if c:
            total += c if f > 0 else -c
    return total


def classical_max(ineq: BellInequality, threads: int | None = None) -> Fraction:
    """Exact maximum of the Bell expression over all local deterministic assignments."""
    from .polytope import scan_vertices

    return scan_vertices(ineq, collect=False, threads=threads).max_value


def algebraic_max(ineq: BellInequality) -> Fraction:
    return sum((abs(c) for c in ineq.coeffs), Fraction(0))


def chsh() -> BellInequality:
    """CHSH normalised so that the local bound is 1."""
    h = Fraction(1, 2)
    return BellInequality(Scenario((2, 2)), (h, h, h, -h), Fraction(1), "CHSH")


def vertex_from_code(scenario: Scenario, code: int) -> Vertex:
    """Assignment number ``code`` in enumeration order.

    Bits are read most-significant first, party 0 and setting 0 first; a set
    bit means outcome -1, so code 0 is the all-ones assignment.
    """
    total = scenario.total_settings
    bits = [(code >> (total - 1 - b)) & 1 for b in range(total)]
    parts, pos = [], 0
    for m in scenario.settings:
        parts.append(tuple(-1 if bit else 1 for bit in bits[pos:pos + m]))
        pos += m
    return Vertex(tuple(parts))


def vertex_to_code(v: Vertex) -> int:
    code = 0
    for vec in v.per_party:
        for x in vec:
            code = (code << 1) | (x < 0)
    return code


def inequality_from_tensor(settings: Iterable[int], values, bound, name=None):
    """Build from a nested sequence / array indexed ``[i][j]...``."""
    import numpy as np

    arr = np.asarray(values, dtype=object)
    scenario = Scenario(tuple(settings))
    if arr.shape != scenario.settings:
        raise ShapeError(f"tensor shape {arr.shape} != scenario {scenario.settings}")
    return BellInequality(
        scenario, tuple(Fraction(x) for x in arr.reshape(-1)), Fraction(bound), name
    )
