"""Correlation-polytope vertices, exact rank, validity and facet certification."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from ._accel import get_kernels
from .core import (
    BellInequality,
    Scenario,
    ShapeError,
    Vertex,
    evaluate,
    vertex_from_code,
)

CHUNK_CELLS = 1 << 20
_INT64_HEADROOM = 1 << 62


def default_threads() -> int:
    value = os.environ.get("BELLFORGE_THREADS")
    if value:
        return max(1, int(value))
    return 1


def enumerate_vertices(scenario: Scenario) -> Iterator[Vertex]:
    """Yield all ``2 ** total_settings`` assignments, all-ones first.

    Distinct assignments may share a feature vector (negating two parties);
    deduplicate on ``features()`` when polytope points are needed.
    """
    scenario.guard()
    for code in range(1 << scenario.total_settings):
        yield vertex_from_code(scenario, code)


def rank_exact(rows: Sequence[Sequence[int]]) -> int:
    """Rank over the rationals by Bareiss fraction-free elimination."""
    M = [[int(x) for x in r] for r in rows]
    if not M:
        return 0
    ncols = len(M[0])
    if any(len(r) != ncols for r in M):
        raise ShapeError("rows of different lengths")
    nrows = len(M)
    rank, prev = 0, 1
    for col in range(ncols):
        piv = next((i for i in range(rank, nrows) if M[i][col]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        prow = M[rank]
        p = prow[col]
        for i in range(rank + 1, nrows):
            row = M[i]
            a = row[col]
            new = row[:col]
            for j in range(col, ncols):
                q, r = divmod(p * row[j] - a * prow[j], prev)
                if r:
                    raise ArithmeticError("Bareiss division was not exact")
                new.append(q)
            M[i] = new
        prev = p
        rank += 1
        if rank == nrows:
            break
    return rank


class IntegerEchelon:
    """Incrementally maintained integer row-echelon basis.

    ``add`` reduces a vector against the basis with cross-multiplication and
    content removal (no fractions) and keeps it if anything survives.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: dict[int, list[int]] = {}

    @property
    def rank(self) -> int:
        return len(self.rows)

    def add(self, vec: Sequence[int]) -> bool:
        v = [int(x) for x in vec]
        if len(v) != self.ncols:
            raise ShapeError("vector length does not match the basis")
        for col in sorted(self.rows):
            a = v[col]
            if not a:
                continue
            row = self.rows[col]
            p = row[col]
            v = [p * x - a * y for x, y in zip(v, row)]
            g = math.gcd(*v)
            if g > 1:
                v = [x // g for x in v]
        lead = next((i for i, x in enumerate(v) if x), None)
        if lead is None:
            return False
        self.rows[lead] = v
        return True


def decode_canonical(scenario: Scenario, code: int) -> Vertex:
    """Vertex for a combined canonical scan code (see ``_pykernels``)."""
    settings = scenario.settings
    m_last = settings[-1]
    u, w = code >> m_last, code & ((1 << m_last) - 1)
    shift = sum(m - 1 for m in settings[:-1])
    parts = []
    for m in settings[:-1]:
        shift -= m - 1
        sub = (u >> shift) & ((1 << (m - 1)) - 1)
        parts.append((1,) + tuple(-1 if (sub >> (m - 1 - k)) & 1 else 1 for k in range(1, m)))
    parts.append(tuple(-1 if (w >> (m_last - 1 - j)) & 1 else 1 for j in range(m_last)))
    return Vertex(tuple(parts))


@dataclass(frozen=True)
class ScanResult:
    max_value: Fraction
    argmax: Vertex
    saturating: np.ndarray | None
    threshold: Fraction | None


def scan_vertices(
    ineq: BellInequality,
    threshold: Fraction | None = None,
    collect: bool = True,
    threads: int | None = None,
    backend: str | None = None,
) -> ScanResult:
    """Visit every distinct vertex once; return the maximum and optionally the
    codes of vertices whose value equals ``threshold`` (default: the bound)."""
    scenario = ineq.scenario
    scenario.guard()
    threshold = ineq.bound if threshold is None else Fraction(threshold)
    ints, _, scale = ineq.integer_form()
    t_scaled = threshold * scale
    if t_scaled.denominator != 1:
        # no integer combination can hit a non-integer threshold
        collect_here, t_int = False, 0
    else:
        collect_here, t_int = collect, int(t_scaled)

    settings = scenario.settings
    m_last = settings[-1]
    outer = tuple(settings[:-1])
    dim_outer = math.prod(outer) if outer else 1
    n_outer_codes = 1 << sum(m - 1 for m in outer)

    if sum(abs(c) for c in ints) < _INT64_HEADROOM:
        C = np.asarray(ints, dtype=np.int64).reshape(dim_outer, m_last)
        kern = get_kernels(backend)
    else:
        C = np.asarray(ints, dtype=object).reshape(dim_outer, m_last)
        kern = get_kernels("python")
    outer_arr = np.asarray(outer, dtype=np.int64)

    step = max(1, CHUNK_CELLS >> m_last)
    chunks = [(lo, min(lo + step, n_outer_codes)) for lo in range(0, n_outer_codes, step)]

    def run(chunk):
        lo, hi = chunk
        buf = np.empty(((hi - lo) << m_last) if collect_here else 0, dtype=np.int64)
        best, code, n = kern.scan_chunk(C, outer_arr, m_last, lo, hi, t_int, collect_here, buf)
        return best, code, buf[:n].copy()

    threads = threads or default_threads()
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]

    best, best_code = None, None
    for value, code, _ in results:
        if best is None or value > best:
            best, best_code = value, code
    sat = None
    if collect:
        parts = [hits for _, _, hits in results]
        sat = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    return ScanResult(
        Fraction(int(best), scale),
        decode_canonical(scenario, int(best_code)),
        sat,
        threshold,
    )


@dataclass(frozen=True)
class ValidityResult:
    valid: bool
    witness: Vertex
    value: Fraction

    def __bool__(self):
        return self.valid


def check_validity(ineq: BellInequality, threads: int | None = None) -> ValidityResult:
    """Whether no vertex exceeds the bound, with a maximising vertex as witness."""
    scan = scan_vertices(ineq, collect=False, threads=threads)
    return ValidityResult(scan.max_value <= ineq.bound, scan.argmax, scan.max_value)


@dataclass(frozen=True)
class TightnessReport:
    valid: bool
    saturating_count: int
    rank: int
    dimension: int
    tight: bool

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "saturating": self.saturating_count,
            "rank": self.rank,
            "dimension": self.dimension,
            "tight": self.tight,
        }


def saturating_vertices(ineq: BellInequality, threads: int | None = None) -> list[Vertex]:
    """Distinct vertices (one per feature vector) at which the bound is attained."""
    scan = scan_vertices(ineq, threads=threads)
    return [decode_canonical(ineq.scenario, int(c)) for c in scan.saturating]


def check_tightness(ineq: BellInequality, threads: int | None = None) -> TightnessReport:
    """Facet test: valid, and the saturating vertices span the full space."""
    scan = scan_vertices(ineq, threads=threads)
    dim = ineq.scenario.dimension()
    valid = scan.max_value <= ineq.bound
    basis = IntegerEchelon(dim)
    chosen = []
    for code in scan.saturating:
        feats = decode_canonical(ineq.scenario, int(code)).features()
        if basis.add(feats):
            chosen.append(feats)
            if basis.rank == dim:
                break
    rank = rank_exact(chosen)
    return TightnessReport(
        valid=valid,
        saturating_count=len(scan.saturating),
        rank=rank,
        dimension=dim,
        tight=valid and rank == dim,
    )


def naive_classical_max(ineq: BellInequality) -> Fraction:
    """Reference maximum by plain enumeration of every assignment."""
    return max(evaluate(ineq, v) for v in enumerate_vertices(ineq.scenario))
