"""U(c) transformations: grammar templates, conditions (a)/(b), and extension.

Replacing the outcomes ``b`` of one party by ``U(c) b`` where ``c`` are the
outcomes of a new party turns a p-party inequality into a (p+1)-party one.
Every entry of ``U(c)`` is a linear form ``u_jm(c) = sum_p x[j][m][p] c_p``.
Templates restrict the rows of ``U`` to the two shapes that map +-1 vectors
to +-1 vectors for every +-1 ``c``:

* ``Single``: ``sign * c_cidx`` in one column, zeros elsewhere;
* ``Pair``: ``sum_sign * (c_k + c_l) / 2`` in one column and
  ``diff_sign * (c_k - c_l) / 2`` in another.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

from .core import (
    BellForgeError,
    BellInequality,
    FormatError,
    GuardError,
    Scenario,
    ShapeError,
    parse_rational,
    format_rational,
)
from .polytope import IntegerEchelon, rank_exact

HALF = Fraction(1, 2)
MAX_TEMPLATE_N = 4
MAX_TEMPLATE_K = 4


class ConditionError(BellForgeError):
    """A raw transformation does not keep +-1 vectors +-1."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def _sign(s) -> int:
    if s not in (1, -1):
        raise ShapeError(f"sign must be +1 or -1, got {s!r}")
    return int(s)


@dataclass(frozen=True)
class Single:
    col: int
    cidx: int
    sign: int = 1

    def __post_init__(self):
        _sign(self.sign)

    def entries(self):
        """(column, new-party index, coefficient) triples of this row."""
        return [(self.col, self.cidx, Fraction(self.sign))]

    def columns(self):
        return (self.col,)

    def settings(self):
        return (self.cidx,)

    def to_json(self):
        return {"kind": "single", "col": self.col, "cidx": self.cidx, "sign": self.sign}


@dataclass(frozen=True)
class Pair:
    sum_col: int
    diff_col: int
    k: int
    l: int
    sum_sign: int = 1
    diff_sign: int = 1

    def __post_init__(self):
        _sign(self.sum_sign)
        _sign(self.diff_sign)
        if self.sum_col == self.diff_col:
            raise ShapeError("pair row needs two distinct columns")
        if not self.k < self.l:
            raise ShapeError(f"pair row needs k < l, got k={self.k}, l={self.l}")

    def entries(self):
        s, d = self.sum_sign * HALF, self.diff_sign * HALF
        return [
            (self.sum_col, self.k, s),
            (self.sum_col, self.l, s),
            (self.diff_col, self.k, d),
            (self.diff_col, self.l, -d),
        ]

    def columns(self):
        return (self.sum_col, self.diff_col)

    def settings(self):
        return (self.k, self.l)

    def to_json(self):
        return {
            "kind": "pair",
            "sum_col": self.sum_col,
            "diff_col": self.diff_col,
            "k": self.k,
            "l": self.l,
            "sum_sign": self.sum_sign,
            "diff_sign": self.diff_sign,
        }


RowSpec = Union[Single, Pair]


class _Transform:
    """Shared behaviour of templates and raw matrices."""

    n: int
    k_new: int

    def coefficient_tensor(self) -> list[list[list[Fraction]]]:
        raise NotImplementedError

    def instantiate(self, c: Sequence[int]):
        c = tuple(int(x) for x in c)
        if len(c) != self.k_new:
            raise ShapeError(f"c has length {len(c)}, expected {self.k_new}")
        if any(x not in (1, -1) for x in c):
            raise ShapeError(f"c must be a +-1 vector: {c}")
        X = self.coefficient_tensor()
        out = []
        for j in range(self.n):
            row = []
            for m in range(self.n):
                v = sum((X[j][m][p] * c[p] for p in range(self.k_new)), Fraction(0))
                row.append(int(v) if v.denominator == 1 else v)
            out.append(row)
        return out


@dataclass(frozen=True)
class UTemplate(_Transform):
    n: int
    k_new: int
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if self.n < 1 or self.k_new < 1:
            raise ShapeError("template dimensions must be positive")
        if len(self.rows) != self.n:
            raise ShapeError(f"template needs {self.n} rows, got {len(self.rows)}")
        for row in self.rows:
            if not isinstance(row, (Single, Pair)):
                raise ShapeError(f"not a row spec: {row!r}")
            if any(not 0 <= col < self.n for col in row.columns()):
                raise ShapeError(f"column out of range in {row}")
            if any(not 0 <= p < self.k_new for p in row.settings()):
                raise ShapeError(f"new-party setting out of range in {row}")

    def coefficient_tensor(self):
        X = [[[Fraction(0)] * self.k_new for _ in range(self.n)] for _ in range(self.n)]
        for j, row in enumerate(self.rows):
            for col, p, val in row.entries():
                X[j][col][p] += val
        return X

    def to_json(self):
        return {"n": self.n, "k_new": self.k_new, "rows": [r.to_json() for r in self.rows]}


@dataclass(frozen=True)
class RawTransform(_Transform):
    """A hand-written matrix of linear forms; must pass condition (a) before use."""

    n: int
    k_new: int
    matrix: tuple

    def __post_init__(self):
        mat = tuple(
            tuple(tuple(Fraction(x) for x in entry) for entry in row) for row in self.matrix
        )
        if len(mat) != self.n or any(len(row) != self.n for row in mat):
            raise ShapeError(f"raw matrix must be {self.n}x{self.n}")
        if any(len(e) != self.k_new for row in mat for e in row):
            raise ShapeError(f"each entry needs {self.k_new} coefficients")
        object.__setattr__(self, "matrix", mat)

    def coefficient_tensor(self):
        return [[list(e) for e in row] for row in self.matrix]

    def to_json(self):
        return {
            "n": self.n,
            "k_new": self.k_new,
            "matrix": [[[format_rational(x) for x in e] for e in row] for row in self.matrix],
        }


def instantiate(t: _Transform, c: Sequence[int]):
    """The numeric matrix ``U(c)`` for one +-1 vector ``c``."""
    return t.instantiate(c)


def _pm_vectors(length):
    return itertools.product((1, -1), repeat=length)


@dataclass(frozen=True)
class ConditionResult:
    holds: bool
    witness: dict | None = None

    def __bool__(self):
        return self.holds


def check_condition_a(t: _Transform) -> ConditionResult:
    """Exhaustively test that ``U(c) b`` is a +-1 vector for all +-1 ``b, c``."""
    for c in _pm_vectors(t.k_new):
        U = t.instantiate(c)
        for b in _pm_vectors(t.n):
            image = [sum(U[j][m] * b[m] for m in range(t.n)) for j in range(t.n)]
            if any(x not in (1, -1) for x in image):
                return ConditionResult(
                    False,
                    {
                        "c": list(c),
                        "b": list(b),
                        "image": [format_rational(Fraction(x)) for x in image],
                    },
                )
    return ConditionResult(True)


def _nonsingular(U) -> bool:
    scale = 1
    for row in U:
        for x in row:
            scale = scale * Fraction(x).denominator
    return rank_exact([[int(Fraction(x) * scale) for x in row] for row in U]) == len(U)


def check_condition_b(t: _Transform) -> bool:
    """``U(c)`` is non-singular for every +-1 vector ``c``."""
    return all(_nonsingular(t.instantiate(c)) for c in _pm_vectors(t.k_new))


@dataclass(frozen=True)
class RelaxedResult:
    holds: bool
    witnesses: tuple[tuple[int, ...], ...]

    def __bool__(self):
        return self.holds


def check_condition_b_relaxed(t: _Transform) -> RelaxedResult:
    """Look for ``k_new`` linearly independent ``c`` with non-singular ``U(c)``.

    Candidates are scanned all-ones first; the witnesses are a greedily
    grown independent set, maximal when the condition fails.
    """
    basis = IntegerEchelon(t.k_new)
    found = []
    for c in _pm_vectors(t.k_new):
        if _nonsingular(t.instantiate(c)) and basis.add(c):
            found.append(tuple(c))
            if len(found) == t.k_new:
                break
    return RelaxedResult(len(found) == t.k_new, tuple(found))


def apply_extension(
    ineq: BellInequality, t: _Transform, target_party: int | None = None, name=None
) -> BellInequality:
    """Substitute ``U(c) v`` for the outcomes ``v`` of ``target_party``.

    The new party is appended last.  For indices ``m`` of the target party
    and ``p`` of the new party the coefficient is
    ``G[..., m, ..., p] = sum_j F[..., j, ...] * x[j][m][p]``; the bound is
    unchanged.
    """
    settings = ineq.scenario.settings
    if target_party is None:
        target_party = len(settings) - 1
    if not 0 <= target_party < len(settings):
        raise ShapeError(f"no party {target_party} in scenario {list(settings)}")
    if t.n != settings[target_party]:
        raise ShapeError(
            f"transformation is {t.n}x{t.n} but party {target_party} has "
            f"{settings[target_party]} settings"
        )
    if not isinstance(t, UTemplate):
        cond = check_condition_a(t)
        if not cond:
            raise ConditionError("transformation violates condition (a)", cond.witness)

    X = t.coefficient_tensor()
    new_settings = settings + (t.k_new,)
    terms: dict[tuple[int, ...], Fraction] = {}
    for idx, coeff in ineq.terms().items():
        j = idx[target_party]
        for m in range(t.n):
            for p in range(t.k_new):
                x = X[j][m][p]
                if x:
                    key = idx[:target_party] + (m,) + idx[target_party + 1:] + (p,)
                    terms[key] = terms.get(key, Fraction(0)) + coeff * x
    if not any(terms.values()):
        raise ShapeError("extension produced an all-zero inequality")
    return BellInequality.from_terms(new_settings, terms, ineq.bound, name)


def row_options(n: int, k_new: int) -> list[RowSpec]:
    """Every grammar row for an ``n``-column template, in enumeration order."""
    rows: list[RowSpec] = [
        Single(col, cidx, sign)
        for col in range(n)
        for cidx in range(k_new)
        for sign in (1, -1)
    ]
    rows += [
        Pair(sc, dc, k, l, ss, ds)
        for sc in range(n)
        for dc in range(n)
        if sc != dc
        for k in range(k_new)
        for l in range(k + 1, k_new)
        for ss in (1, -1)
        for ds in (1, -1)
    ]
    return rows


def _guard_templates(n, k_new):
    if n < 1 or k_new < 1:
        raise ShapeError("template dimensions must be positive")
    if n > MAX_TEMPLATE_N or k_new > MAX_TEMPLATE_K:
        raise GuardError(
            f"template enumeration limited to n <= {MAX_TEMPLATE_N}, "
            f"k_new <= {MAX_TEMPLATE_K}"
        )


def template_count(n: int, k_new: int) -> int:
    per_row = 2 * n * k_new + 2 * n * (n - 1) * k_new * (k_new - 1)
    return per_row ** n


def enumerate_templates(n: int, k_new: int) -> Iterator[UTemplate]:
    """All grammar templates, each exactly once, in index order."""
    _guard_templates(n, k_new)
    opts = row_options(n, k_new)
    for rows in itertools.product(opts, repeat=n):
        yield UTemplate(n, k_new, rows)


def template_at(n: int, k_new: int, index: int) -> UTemplate:
    """The ``index``-th template of ``enumerate_templates(n, k_new)``."""
    _guard_templates(n, k_new)
    opts = row_options(n, k_new)
    if not 0 <= index < len(opts) ** n:
        raise IndexError(index)
    rows = []
    for _ in range(n):
        index, r = divmod(index, len(opts))
        rows.append(r)
    return UTemplate(n, k_new, tuple(opts[r] for r in reversed(rows)))


def _row_from_json(doc):
    try:
        kind = doc["kind"]
        if kind == "single":
            return Single(int(doc["col"]), int(doc["cidx"]), int(doc.get("sign", 1)))
        if kind == "pair":
            return Pair(
                int(doc["sum_col"]),
                int(doc["diff_col"]),
                int(doc["k"]),
                int(doc["l"]),
                int(doc.get("sum_sign", 1)),
                int(doc.get("diff_sign", 1)),
            )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad row spec {doc!r}: {exc}") from exc
    raise FormatError(f"unknown row kind {doc.get('kind')!r}")


def transform_from_json(doc) -> _Transform:
    """Parse a template (``rows``) or raw matrix (``matrix``) document."""
    if not isinstance(doc, dict) or "n" not in doc or "k_new" not in doc:
        raise FormatError("a template document needs 'n' and 'k_new'")
    try:
        if "rows" in doc:
            return UTemplate(int(doc["n"]), int(doc["k_new"]), tuple(_row_from_json(r) for r in doc["rows"]))
        if "matrix" in doc:
            mat = [[[parse_rational(x) for x in e] for e in row] for row in doc["matrix"]]
            return RawTransform(int(doc["n"]), int(doc["k_new"]), mat)
    except ShapeError as exc:
        raise FormatError(str(exc)) from exc
    raise FormatError("a template document needs 'rows' or 'matrix'")


def load_transform(text: str) -> _Transform:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(
            f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return transform_from_json(doc)


def diagonal(n: int, k_new: int, cidx: Sequence[int] | None = None, signs=None) -> UTemplate:
    """``diag(s_0 c_{i_0}, ..., s_{n-1} c_{i_{n-1}})``; defaults to ``c_j`` on row j."""
    cidx = list(range(n)) if cidx is None else list(cidx)
    signs = [1] * n if signs is None else list(signs)
    return UTemplate(n, k_new, tuple(Single(j, cidx[j], signs[j]) for j in range(n)))


def extension_scenario(ineq: BellInequality, t: _Transform) -> Scenario:
    return Scenario(ineq.scenario.settings + (t.k_new,))
