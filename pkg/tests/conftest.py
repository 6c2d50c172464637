import itertools
from fractions import Fraction

import pytest

from bellforge import _accel
from bellforge.core import BellInequality, chsh as make_chsh

BACKENDS = ["python"] + (["cython"] if _accel.compiled_kernels is not None else [])


@pytest.fixture
def chsh():
    return make_chsh()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def brute_values(ineq):
    """Independent oracle: value of every assignment by direct summation."""
    settings = ineq.scenario.settings
    vecs = [list(itertools.product((1, -1), repeat=m)) for m in settings]
    out = {}
    for combo in itertools.product(*vecs):
        total = Fraction(0)
        for idx, c in zip(itertools.product(*(range(m) for m in settings)), ineq.coeffs):
            prod = 1
            for p, i in enumerate(idx):
                prod *= combo[p][i]
            total += c * prod
        out[combo] = total
    return out


def brute_features(combo):
    feats = [1]
    for vec in combo:
        feats = [f * x for f in feats for x in vec]
    return tuple(feats)


def fraction_rank(rows):
    """Independent oracle: textbook Gaussian elimination over Fraction."""
    M = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    ncols = len(M[0]) if M else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(M)) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for i in range(len(M)):
            if i != rank and M[i][col] != 0:
                f = M[i][col] / M[rank][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank


def random_inequality(rng, settings, lo=-3, hi=3, bound=1):
    n = 1
    for m in settings:
        n *= m
    while True:
        coeffs = [Fraction(rng.randint(lo, hi), rng.choice((1, 2, 4))) for _ in range(n)]
        if any(coeffs):
            return BellInequality(tuple(settings), tuple(coeffs), Fraction(bound))


# criterion id -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split(".")[0]), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {key}: {detail}")
