"""bellforge command line: verify, extend, enumerate, violate, canon, catalog.

Every command prints a JSON run report ``{"command", "config", "result",
"duration_s"}``.  Exit codes: 0 success (a non-tight verdict is a result,
not an error), 2 bad input, 3 resource guard, 4 method precondition failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from collections import OrderedDict
from pathlib import Path

from . import catalog as cat
from ._accel import BACKEND
from .canon import canonical_form, canonical_key
from .core import BellForgeError, BellInequality, FormatError, GuardError, ShapeError
from .extension import (
    ConditionError,
    apply_extension,
    check_condition_a,
    check_condition_b,
    check_condition_b_relaxed,
    enumerate_templates,
    load_transform,
    template_count,
)
from .polytope import check_tightness, check_validity, saturating_vertices, scan_vertices
from .quantum import GHZ, MaxEntangled2, Optimize, SeesawConfig, seesaw_maximize, state_from_json

EXIT_INPUT = 2
EXIT_GUARD = 3
EXIT_PRECONDITION = 4
MAX_ENUMERATED_TEMPLATES = 1 << 20
MAX_LISTED_VERTICES = 256


def _default_threads() -> int:
    env = os.environ.get("BELLFORGE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc


def load_inequality(ref: str) -> BellInequality:
    """A path, ``-`` for stdin, or ``@NAME`` for a built-in catalog entry."""
    if ref.startswith("@"):
        try:
            return cat.get(ref[1:])
        except KeyError:
            raise FormatError(f"no catalog entry named {ref[1:]!r}") from None
    return BellInequality.loads(_read_text(ref))


def _display(ineq: BellInequality, scale_integer: bool) -> dict:
    return (ineq.integer_scaled() if scale_integer else ineq).to_json()


def cmd_verify(args):
    ineq = load_inequality(args.path)
    report = check_tightness(ineq, threads=args.threads)
    result = {"name": ineq.name, **report.to_json()}
    result["classical_max"] = str(scan_vertices(ineq, collect=False, threads=args.threads).max_value)
    if report.saturating_count <= MAX_LISTED_VERTICES:
        result["saturating_vertices"] = [v.to_json() for v in saturating_vertices(ineq, args.threads)]
    return result


def cmd_extend(args):
    ineq = load_inequality(args.ineq)
    transform = load_transform(_read_text(args.template))
    cond_a = check_condition_a(transform)
    if not cond_a:
        raise ConditionError("transformation violates condition (a)", cond_a.witness)
    party = args.party
    extended = apply_extension(ineq, transform, target_party=party, name=args.name)
    relaxed = check_condition_b_relaxed(transform)
    tight = check_tightness(extended, threads=args.threads)
    if args.out:
        Path(args.out).write_text(extended.dumps(pretty=True) + "\n", encoding="utf-8")
    return {
        "inequality": _display(extended, args.scale_integer),
        "conditions": {
            "a": True,
            "b": check_condition_b(transform),
            "b_relaxed": relaxed.holds,
            "b_relaxed_witnesses": [list(c) for c in relaxed.witnesses],
        },
        "tightness": tight.to_json(),
        "catalog_match": cat.match_catalog(extended),
    }


def cmd_enumerate(args):
    base = load_inequality(args.base)
    party = base.scenario.n_parties - 1 if args.party is None else args.party
    if not 0 <= party < base.scenario.n_parties:
        raise ShapeError(f"no party {party}")
    n = base.scenario.settings[party]
    k = args.new_settings
    total = template_count(n, k)
    if total > MAX_ENUMERATED_TEMPLATES:
        raise GuardError(f"{total} templates exceed the limit of {MAX_ENUMERATED_TEMPLATES}")
    classes: "OrderedDict[tuple, dict]" = OrderedDict()
    all_valid = True
    for index, t in enumerate(enumerate_templates(n, k)):
        ext = apply_extension(base, t, target_party=party)
        key = canonical_key(ext)
        entry = classes.get(key)
        if entry is None:
            validity = check_validity(ext, threads=args.threads)
            report = check_tightness(ext, threads=args.threads)
            entry = classes[key] = {
                "first_index": index,
                "count": 0,
                "catalog": cat.match_catalog(ext),
                "valid": report.valid,
                "tight": report.tight,
                "rank": report.rank,
                "classical_max": str(validity.value),
                "example_template": t.to_json(),
                "canonical": canonical_form(ext).to_json(),
            }
        entry["count"] += 1
        all_valid = all_valid and entry["valid"]
    return {
        "base": base.name,
        "templates": total,
        "n_classes": len(classes),
        "all_valid": all_valid,
        "classes": list(classes.values()),
    }


def _state_arg(choice: str, n_parties: int):
    if choice == "ghz":
        return GHZ(n_parties)
    if choice == "maxent2":
        if n_parties != 2:
            raise ShapeError("maxent2 needs a two-party inequality")
        return MaxEntangled2()
    if choice == "opt":
        return Optimize()
    try:
        doc = json.loads(_read_text(choice))
    except json.JSONDecodeError as exc:
        raise FormatError(f"state file: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return state_from_json(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad state file: {exc}") from exc


def cmd_violate(args):
    ineq = load_inequality(args.ineq)
    state = _state_arg(args.state, ineq.scenario.n_parties)
    if not isinstance(state, Optimize) and state.n != ineq.scenario.n_parties:
        raise ShapeError(
            f"state has {state.n} qubits but the inequality has {ineq.scenario.n_parties} parties"
        )
    config = SeesawConfig(
        restarts=args.restarts,
        max_iters=args.max_iters,
        seed=args.seed,
        threads=args.threads,
    )
    res = seesaw_maximize(ineq, state, config)
    return {"name": ineq.name, "state": args.state, **res.to_json(), "config": config.to_json()}


def cmd_canon(args):
    ineq = load_inequality(args.path)
    form = canonical_form(ineq)
    return {
        "name": ineq.name,
        "canonical": _display(form, args.scale_integer),
        "catalog_match": cat.match_catalog(ineq),
    }


def cmd_catalog(args):
    out = []
    for entry in cat.load_catalog():
        ineq = entry.inequality
        report = check_tightness(ineq, threads=args.threads)
        out.append(
            {
                **_display(ineq, args.scale_integer),
                "note": entry.note,
                "classical_max": str(scan_vertices(ineq, collect=False, threads=args.threads).max_value),
                "tightness": report.to_json(),
            }
        )
    return {"entries": out}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: BELLFORGE_THREADS or CPU count)")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="pretty", action="store_false", help="compact JSON (default)")
    fmt.add_argument("--pretty", dest="pretty", action="store_true", help="indented JSON")

    parser = argparse.ArgumentParser(prog="bellforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="certify validity and tightness")
    p.add_argument("path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("extend", parents=[common], help="apply a U(c) template")
    p.add_argument("ineq")
    p.add_argument("template")
    p.add_argument("--party", type=int, default=None, help="party whose outcomes are transformed (default: last)")
    p.add_argument("--out", help="also write the extended inequality to this file")
    p.add_argument("--name", default=None)
    p.add_argument("--scale-integer", action="store_true")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("enumerate", parents=[common], help="apply every template and classify")
    p.add_argument("base")
    p.add_argument("--new-settings", type=int, default=2)
    p.add_argument("--party", type=int, default=None)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("violate", parents=[common], help="see-saw search for the quantum value")
    p.add_argument("ineq")
    p.add_argument("--state", default="opt", help="ghz, maxent2, opt or a JSON amplitude file")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_violate)

    p = sub.add_parser("canon", parents=[common], help="canonical form and catalog match")
    p.add_argument("path")
    p.add_argument("--scale-integer", action="store_true")
    p.set_defaults(func=cmd_canon)

    p = sub.add_parser("catalog", parents=[common], help="list built-in inequalities")
    p.add_argument("--scale-integer", action="store_true")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is None:
        args.threads = _default_threads()
    config = {k: v for k, v in vars(args).items() if k not in ("func", "command", "pretty")}
    config["backend"] = BACKEND
    start = time.perf_counter()
    try:
        result = args.func(args)
    except ConditionError as exc:
        print(json.dumps({"error": str(exc), "witness": exc.witness}), file=sys.stderr)
        return EXIT_PRECONDITION
    except GuardError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_GUARD
    except (FormatError, ShapeError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_INPUT
    except BellForgeError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_INPUT
    report = {
        "command": args.command,
        "config": config,
        "result": result,
        "duration_s": round(time.perf_counter() - start, 3),
    }
    print(json.dumps(report, indent=2 if args.pretty else None))
    return 0


if __name__ == "__main__":
    sys.exit(main())
