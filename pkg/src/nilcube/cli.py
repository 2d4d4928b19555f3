"""Command line entry point: ``nilcube check | translations | solve | lift``.

Every run writes one JSON report with sorted keys.  Exit codes: 0 all
checks passed, 1 a check failed (or a solve/lift was obstructed), 2 usage
or parse error, 3 an enumeration cap was hit.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from typing import Any, Sequence

from . import __version__
from .cocycles import (
    Cocycle,
    check_cocycle,
    coboundary,
    small_representative,
    solve_coboundary_averaging,
    solve_coboundary_linear,
)
from .config import ConfigError, SpaceSpec, load_space
from .cubespace import (
    CubeSpace,
    check_completion,
    check_cube_symmetries,
    check_ergodic,
    check_glueing,
    check_uniqueness,
    structure_group,
)
from .errors import CapExceeded, CheckResult, NilcubeError, SmallnessBudgetExceeded
from .groups import AbelianGroup
from .host_kra import NilmanifoldSpace
from .translations import (
    check_filtration_property,
    enumerate_translations,
    generated_group,
    lift_translation,
)
from .values import ValueGroup, format_value, parse_value

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3
DEFAULT_SEED = 0


class UsageError(NilcubeError):
    pass


# -- cocycle tables -----------------------------------------------------------


def format_cocycle_table(rho: Cocycle) -> str:
    g = rho.group
    head = f"@ torus={g.torus_rank} finite={' '.join(map(str, getattr(g.finite, 'moduli', ()))) or '-'}"
    lines = [head]
    for cube, v in rho.sorted_items():
        lines.append(",".join(map(str, cube)) + " " + format_value(v))
    return "\n".join(lines) + "\n"


def parse_cocycle_table(text: str, X: CubeSpace) -> Cocycle:
    """Lines ``v0,v1,... value``; an optional first line ``@ torus=d finite=m1 m2``
    fixes the value group (default: one torus coordinate, no finite part)."""
    group = ValueGroup(1)
    entries: dict[tuple, Any] = {}
    order = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("@"):
            if entries:
                raise ConfigError("value group directive must come first", lineno, 1)
            group = _parse_directive(line, lineno)
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError("expected 'cube-id value'", lineno, 1)
        try:
            cube = tuple(int(x) for x in parts[0].split(","))
        except ValueError:
            raise ConfigError("cube id must be comma-separated point ids", lineno, 1) from None
        if any(not 0 <= x < X.npoints for x in cube):
            raise ConfigError("point id out of range", lineno, 1)
        n = (len(cube) - 1).bit_length() if len(cube) > 1 else 0
        if 1 << n != len(cube):
            raise ConfigError("cube length must be a power of two", lineno, 1)
        if order is None:
            order = n
        elif order != n:
            raise ConfigError("all cubes in a table must have one dimension", lineno, 1)
        try:
            value = parse_value(parts[1], group)
        except (ValueError, ZeroDivisionError, NilcubeError) as exc:
            raise ConfigError(f"bad value {parts[1]!r}: {exc}", lineno, len(parts[0]) + 2) from None
        if cube in entries:
            raise ConfigError(f"cube {parts[0]} listed twice", lineno, 1)
        entries[cube] = value
    if order is None:
        raise ConfigError("empty cocycle table", 1, 1)
    if not all(X.is_cube(c) if order else True for c in entries):
        bad = next(c for c in entries if order and not X.is_cube(c))
        raise ConfigError(f"{','.join(map(str, bad))} is not a cube of the space")
    return Cocycle(X, order, entries, group)


def _parse_directive(line: str, lineno: int) -> ValueGroup:
    torus, finite = 1, ()
    body = line[1:].strip()
    for m in body.replace("finite=", "\0finite=").split("\0"):
        m = m.strip()
        if m.startswith("torus="):
            rest = m[len("torus="):].split()
            torus = int(rest[0])
        elif m.startswith("finite="):
            raw = m[len("finite="):].strip()
            finite = () if raw in ("", "-") else tuple(int(x) for x in raw.split())
        elif m:
            raise ConfigError(f"unknown directive {m!r}", lineno, 1)
    return ValueGroup(torus, AbelianGroup(finite) if finite else None)


def _function_table(f: dict) -> dict[str, str]:
    return {str(x): format_value(v) if hasattr(v, "torus") else str(v) for x, v in sorted(f.items())}


# -- helpers --------------------------------------------------------------


def _check_json(res: CheckResult) -> dict:
    out: dict = {"passed": bool(res.passed), "coverage": res.coverage}
    if res.counts:
        out["counts"] = res.counts
    if res.detail:
        out["detail"] = res.detail
    if not res.passed and res.witness is not None:
        out["witness"] = _jsonable(res.witness)
    return out


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        seq = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in seq]
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "torus"):
        return format_value(obj)
    if isinstance(obj, (int, float, str, bool)) or obj is None:
        return obj
    return str(obj)


def _generators(npoints: int, elements: Sequence[tuple]) -> list[tuple]:
    gens: list[tuple] = []
    span = generated_group(npoints, [])
    for p in sorted(elements):
        if p not in span:
            gens.append(p)
            span = generated_group(npoints, gens)
    return gens


def _levels(raw: str | None, default: Sequence[int]) -> list[int]:
    if not raw:
        return list(default)
    out: set[int] = set()
    for part in raw.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-", 1)
            out.update(range(int(a), int(b) + 1))
        elif part:
            out.add(int(part))
    if not out or min(out) < 0:
        raise UsageError("levels must be non-negative integers")
    return sorted(out)


def _parse_map(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in raw.replace(" ", "").split(","))
    except ValueError:
        raise UsageError("--map must be comma-separated point ids") from None


# -- commands ---------------------------------------------------------------


def cmd_check(spec: SpaceSpec, X: CubeSpace, args) -> tuple[dict, int]:
    results: dict = {}
    results["ergodic"] = _check_json(check_ergodic(X))
    results["glueing"] = _check_json(check_glueing(X, seed=args.seed))
    results["cube_symmetries"] = _check_json(check_cube_symmetries(X))
    for n in range(1, X.max_dim + 1):
        results[f"completion_{n}"] = _check_json(check_completion(X, n, limit=spec.max_cubes))
    s = X.claimed_degree
    if s is not None and s + 1 <= X.max_dim:
        results[f"uniqueness_{s + 1}"] = _check_json(check_uniqueness(X, s + 1))
    passed = all(r["passed"] for r in results.values())
    return {"checks": results, "all_passed": passed}, EXIT_OK if passed else EXIT_FAIL


def _left_multiplications(X: NilmanifoldSpace, level: int) -> list[tuple]:
    """Actions of the filtration's ``level`` subgroup on the points."""
    G = X.group
    out = set()
    for g in sorted(X.filtration.G(level)):
        out.add(tuple(int(X.coset_of[G.mul(g, int(r))]) for r in X.reps))
    return sorted(out)


def cmd_translations(spec: SpaceSpec, X: CubeSpace, args) -> tuple[dict, int]:
    s = X.claimed_degree
    top = (s + 1) if s is not None else X.max_dim
    levels = _levels(args.levels, range(1, top + 1))
    groups = {}
    out: dict = {}
    capped = False
    for k in levels:
        try:
            tg = enumerate_translations(X, k, method=args.method, max_points=spec.max_points)
        except CapExceeded as exc:
            capped = True
            out[str(k)] = {"complete": False, "detail": str(exc),
                           "partial_order": len(exc.partial) if exc.partial is not None else None}
            continue
        groups[k] = tg
        entry = {
            "order": tg.order,
            "complete": tg.complete,
            "generators": [list(p) for p in _generators(X.npoints, list(tg.elements))],
        }
        if isinstance(X, NilmanifoldSpace) and k <= X.filtration.degree + 1:
            lm = _left_multiplications(X, max(k, 0))
            entry["left_multiplications"] = [list(p) for p in lm]
            entry["left_multiplications_contained"] = all(p in tg for p in lm)
        out[str(k)] = entry
    report: dict = {"levels": out}
    ok = True
    if len(groups) >= 2:
        fil = check_filtration_property(groups)
        report["filtration_property"] = _check_json(fil)
        ok = fil.passed
    for entry in out.values():
        if entry.get("left_multiplications_contained") is False:
            ok = False
    if capped:
        return report, EXIT_CAP
    return report, EXIT_OK if ok else EXIT_FAIL


def cmd_solve(spec: SpaceSpec, X: CubeSpace, args, table: str) -> tuple[dict, int]:
    rho = parse_cocycle_table(table, X)
    report: dict = {"order": rho.order, "cubes": len(rho)}
    if len(rho) != X.count_cubes(rho.order):
        report["accepted"] = False
        report["detail"] = f"table lists {len(rho)} of {X.count_cubes(rho.order)} cubes"
        return report, EXIT_FAIL
    axioms = check_cocycle(rho, seed=args.seed)
    report["cocycle_check"] = _check_json(axioms)
    if not axioms.passed:
        report["accepted"] = False
        return report, EXIT_FAIL
    report["accepted"] = True
    solutions = {}
    code = EXIT_OK
    if args.method in ("linear", "both"):
        lin = solve_coboundary_linear(rho)
        if lin.solvable:
            solutions["linear"] = lin.function
            report["linear"] = {"solvable": True, "solution": _function_table(lin.function)}
        else:
            report["linear"] = {"solvable": False, "certificate": _jsonable(lin.certificate)}
            code = EXIT_FAIL
    if args.method in ("averaging", "both"):
        try:
            wit = solve_coboundary_averaging(X, rho)
            solutions["averaging"] = wit.f
            report["averaging"] = {"solvable": True, "solution": _function_table(wit.f),
                                   "report": _jsonable(wit.report)}
        except SmallnessBudgetExceeded as exc:
            report["averaging"] = {"solvable": False, "detail": str(exc)}
            if args.method == "averaging":
                code = EXIT_FAIL
    for name, f in solutions.items():
        back = coboundary(X, f, rho.order, rho.group)
        report[name]["round_trip"] = back.values == rho.values
        if back.values != rho.values:
            code = EXIT_FAIL
    if len(solutions) == 2:
        diff = [solutions["linear"][x] - solutions["averaging"][x] for x in range(X.npoints)]
        constant = len(set(diff)) == 1
        closed = coboundary(X, diff, rho.order, rho.group).is_zero()
        report["cross_validation"] = {"difference_closed": closed, "difference_constant": constant}
        if closed and not constant and rho.group.finite.order == 1:
            # solutions may differ by a closed torsion function; compare canonical representatives
            a = small_representative(rho, solutions["linear"])
            b = small_representative(rho, solutions["averaging"])
            rest = {a[x] - b[x] for x in range(X.npoints)}
            report["cross_validation"]["normalized_difference_constant"] = len(rest) == 1
        if not closed:
            code = EXIT_FAIL
    return report, code


def cmd_lift(spec: SpaceSpec, X: CubeSpace, args) -> tuple[dict, int]:
    s = X.claimed_degree
    if s is None:
        raise UsageError("lifting needs a space with a known degree")
    sg = structure_group(X, s)
    fm = sg.factor
    report: dict = {
        "structure_group": list(sg.group.moduli),
        "factor_points": fm.target.npoints,
        "fibers": [[int(v) for v in f] for f in fm.fibers],
    }
    phi_bar = _parse_map(args.map) if args.map else tuple(range(fm.target.npoints))
    res = lift_translation(X, phi_bar, args.k, sg)
    report["factor_map"] = list(res.factor_map)
    report["bundle_map"] = list(res.bundle_map)
    report["lifted"] = res.lifted
    report["transcript"] = _jsonable(res.transcript)
    if res.lifted:
        report["lift"] = list(res.lift)
        report["correction"] = _function_table(res.correction)
        return report, EXIT_OK
    report["obstruction"] = _jsonable(res.obstruction)
    return report, EXIT_FAIL


# -- driver ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", required=True, help="space definition file")
    common.add_argument("--max-dim", type=int, default=None, help="largest cube dimension")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for sampled checks")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--timings", action="store_true", help="include wall-clock timings")

    parser = argparse.ArgumentParser(prog="nilcube", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nilcube {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="cubespace and nilspace axioms")
    p = sub.add_parser("translations", parents=[common], help="translation groups per level")
    p.add_argument("--levels", default=None, help="e.g. '1-3' or '0,2'")
    p.add_argument("--method", default="auto", choices=["auto", "definition", "corner", "both"])
    p = sub.add_parser("solve", parents=[common], help="solve d^l f = rho")
    p.add_argument("--cocycle", required=True, help="cocycle table file")
    p.add_argument("--method", default="both", choices=["averaging", "linear", "both"])
    p = sub.add_parser("lift", parents=[common], help="lift a factor translation")
    p.add_argument("--map", default=None, help="factor translation as comma-separated images")
    p.add_argument("--k", type=int, default=1, help="translation level")
    return parser


def _digest(parts: Sequence[str]) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode("utf-8"))
        h.update(b"\0")
    return h.hexdigest()


def run(argv: Sequence[str] | None = None) -> tuple[dict, int]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        raise SystemExit(EXIT_USAGE if code else EXIT_OK) from None
    if args.seed < 0 or args.seed >= 1 << 64:
        parser.error("--seed must fit in an unsigned 64-bit integer")
    report: dict = {"command": args.command, "tool_version": __version__, "seed": args.seed}
    inputs = [args.command]
    started = time.perf_counter()
    try:
        spec, text = load_space(args.spec, args.max_dim)
        inputs.append(text)
        extra = ""
        if args.command == "solve":
            with open(args.cocycle, encoding="utf-8") as fh:
                extra = fh.read()
            inputs += [extra, args.method]
        elif args.command == "translations":
            inputs += [str(args.levels), args.method]
        elif args.command == "lift":
            inputs += [str(args.map), str(args.k)]
        inputs += [str(spec.max_dim), str(args.seed)]
        report["inputs_digest"] = _digest(inputs)
        X = spec.build()
        report["space"] = {"kind": spec.kind, "name": X.name, "points": X.npoints,
                           "max_dim": X.max_dim, "degree": X.claimed_degree}
        if args.command == "check":
            results, code = cmd_check(spec, X, args)
        elif args.command == "translations":
            results, code = cmd_translations(spec, X, args)
        elif args.command == "solve":
            results, code = cmd_solve(spec, X, args, extra)
        else:
            results, code = cmd_lift(spec, X, args)
        report["results"] = results
    except (ConfigError, UsageError, OSError) as exc:
        report["error"] = {"kind": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigError) and exc.line is not None:
            report["error"].update(line=exc.line, column=exc.column)
        code = EXIT_USAGE
    except CapExceeded as exc:
        report["error"] = {"kind": "CapExceeded", "message": str(exc)}
        code = EXIT_CAP
    except NilcubeError as exc:
        report["error"] = {"kind": type(exc).__name__, "message": str(exc)}
        witness = getattr(exc, "witness", None)
        if witness is not None:
            report["error"]["witness"] = _jsonable(witness)
        code = EXIT_FAIL
    report["exit_code"] = code
    if args.timings:
        report["timings"] = {"total_seconds": round(time.perf_counter() - started, 6)}
    report["_out"] = args.out
    return report, code


def render(report: dict) -> str:
    return json.dumps({k: v for k, v in report.items() if k != "_out"}, sort_keys=True, indent=2) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    try:
        report, code = run(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    text = render(report)
    if report.get("_out"):
        with open(report["_out"], "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if "error" in report:
        sys.stderr.write(f"nilcube: {report['error']['message']}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
