"""Compare the compiled and pure-Python kernels on vertex scans and canonical forms.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import random
import time
from fractions import Fraction

from bellforge import _accel, catalog
from bellforge.canon import canonical_form
from bellforge.core import BellInequality
from bellforge.polytope import scan_vertices

SCAN_CASES = ["4by4", "4by4by42", "4by4by43"]
CANON_CASES = ["A2", "MABK4", "4by4"]


def random_inequality(settings, seed=0):
    rng = random.Random(seed)
    n = 1
    for m in settings:
        n *= m
    return BellInequality(tuple(settings), tuple(Fraction(rng.randint(-3, 3)) for _ in range(n)), 1)


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    backends = ["python"] + (["cython"] if _accel.compiled_kernels is not None else [])
    if len(backends) == 1:
        print("compiled kernels not built; timing the Python fallback only")

    print(f"{'task':<28}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    rows = [(f"scan {n}", lambda b, n=n: scan_vertices(catalog.get(n), threads=1, backend=b)) for n in SCAN_CASES]
    big = random_inequality((8, 8, 8))
    rows.append(("scan random 8x8x8", lambda b: scan_vertices(big, threads=1, backend=b)))
    rows += [(f"canon {n}", lambda b, n=n: canonical_form(catalog.get(n), backend=b)) for n in CANON_CASES]
    for label, fn in rows:
        times = [timed(lambda: fn(b), args.repeat) for b in backends]
        speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else ""
        print(f"{label:<28}" + "".join(f"{t:>11.4f}s" for t in times) + speed)


if __name__ == "__main__":
    main()
